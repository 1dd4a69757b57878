#pragma once

#include "pumpscope/accumulation.hpp"
#include "pumpscope/core.hpp"
#include "pumpscope/error.hpp"
#include "pumpscope/fetch.hpp"
#include "pumpscope/ingestion.hpp"
#include "pumpscope/pipeline.hpp"
#include "pumpscope/profit.hpp"
#include "pumpscope/report.hpp"
#include "pumpscope/stats.hpp"
#include "pumpscope/synth.hpp"
#include "pumpscope/time.hpp"
