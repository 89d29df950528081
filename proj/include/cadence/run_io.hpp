#pragma once

// JSON-lines encoding of prediction runs. Times are written as days to TCA:
//   event_id, model, cutoff_days_to_tca, predicted_days_to_tca, lower95,
//   upper95, censored, actual_days_to_tca
// plus mode, window_days, predicted_mean_days_to_tca, max_r_hat, error and
// warnings. Absent values are JSON null. Note that lower95 is the earlier
// arrival time and therefore the larger days-to-TCA value.

#include "cadence/prediction.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace cadence {

[[nodiscard]] std::string run_to_json_line(const PredictionRun& run);
[[nodiscard]] std::string runs_to_jsonl(const std::vector<PredictionRun>& runs);

// Throws RowError on a malformed line; blank lines are skipped.
[[nodiscard]] std::vector<PredictionRun> runs_from_jsonl(std::string_view text);

} // namespace cadence
