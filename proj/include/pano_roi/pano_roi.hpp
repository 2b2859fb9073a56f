#pragma once

#include "pano_roi/augmentation.hpp"
#include "pano_roi/box.hpp"
#include "pano_roi/error.hpp"
#include "pano_roi/evaluation.hpp"
#include "pano_roi/geometry.hpp"
#include "pano_roi/io.hpp"
#include "pano_roi/optimizer.hpp"
#include "pano_roi/pipeline.hpp"
#include "pano_roi/proposals.hpp"
#include "pano_roi/raster.hpp"
#include "pano_roi/render.hpp"
#include "pano_roi/rng.hpp"
#include "pano_roi/saliency.hpp"
#include "pano_roi/serialization.hpp"
