#pragma once

#include "run_config.hpp"

namespace volcast::cli {

int cmd_simulate(const RunConfig& cfg);
int cmd_train(const RunConfig& cfg);
int cmd_forecast(const RunConfig& cfg);
int cmd_evaluate(const RunConfig& cfg);
int cmd_report(const RunConfig& cfg);

}  // namespace volcast::cli
