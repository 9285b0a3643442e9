#pragma once

// Umbrella header: historical-rating fallback trees, the daily-aggregation
// window index, the evaluation battery, and the pipeline around them.

#include "ratingtree/aggregate.hpp"
#include "ratingtree/calendar.hpp"
#include "ratingtree/combiner.hpp"
#include "ratingtree/csv.hpp"
#include "ratingtree/digest.hpp"
#include "ratingtree/eval.hpp"
#include "ratingtree/ingest.hpp"
#include "ratingtree/pipeline.hpp"
#include "ratingtree/reference.hpp"
#include "ratingtree/synth.hpp"
#include "ratingtree/trees.hpp"
#include "ratingtree/types.hpp"
#include "ratingtree/windows.hpp"
