#pragma once

#include "kds/config.hpp"
#include "kds/error.hpp"
#include "kds/image.hpp"
#include "kds/image_io.hpp"
#include "kds/kde.hpp"
#include "kds/lung_segmentation.hpp"
#include "kds/manifest.hpp"
#include "kds/natural_order.hpp"
#include "kds/pipeline.hpp"
#include "kds/scan_ingest.hpp"
#include "kds/slice_sampler.hpp"
#include "kds/spatial_filtering.hpp"
