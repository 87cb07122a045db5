#pragma once

#include "fdrsky/dataset.hpp"
#include "fdrsky/distance.hpp"
#include "fdrsky/geometry.hpp"
#include "fdrsky/image.hpp"
#include "fdrsky/io/hdr.hpp"
#include "fdrsky/io/pbm.hpp"
#include "fdrsky/io/pfm.hpp"
#include "fdrsky/losses.hpp"
#include "fdrsky/metrics.hpp"
#include "fdrsky/noise.hpp"
#include "fdrsky/resample.hpp"
#include "fdrsky/segmentation.hpp"
#include "fdrsky/solar.hpp"
#include "fdrsky/tonemap.hpp"
