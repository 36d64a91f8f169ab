#pragma once

#include "tierwatch/error.hpp"
#include "tierwatch/text.hpp"
#include "tierwatch/supply_graph.hpp"
#include "tierwatch/extraction.hpp"
#include "tierwatch/enrichment.hpp"
#include "tierwatch/risk_engine.hpp"
#include "tierwatch/decision_policy.hpp"
#include "tierwatch/sourcing.hpp"
#include "tierwatch/run_record.hpp"
#include "tierwatch/eval_harness.hpp"
#include "tierwatch/pipeline.hpp"
