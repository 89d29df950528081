#pragma once

// CDM metadata ingestion: CSV and a KVN subset, grouping into per-event
// arrival series, and the history/future split at a decision cutoff.
//
// Time coordinate: t is measured in days from the window start, so t = 0 at
// TCA - window_days and t = window_days at TCA.

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cadence {

using UtcTime = std::chrono::sys_seconds;

inline constexpr double kSecondsPerDay = 86400.0;

// Parses `YYYY-MM-DDThh:mm:ss` with an optional fractional part (truncated)
// and an optional trailing `Z`. Returns nullopt on any deviation.
[[nodiscard]] std::optional<UtcTime> parse_utc(std::string_view text);

// Formats as `YYYY-MM-DDThh:mm:ssZ`.
[[nodiscard]] std::string format_utc(UtcTime time);

struct CdmRecord {
    std::string event_id;
    UtcTime creation_date{};
    UtcTime tca{};
    std::optional<std::string> message_id;
};

struct ConjunctionEvent {
    std::string event_id;
    UtcTime tca{};
    double window_days{7.0};
    std::vector<double> arrivals;  // strictly increasing, within [0, window_days]

    [[nodiscard]] double days_to_tca(double t) const noexcept { return window_days - t; }
    [[nodiscard]] double cutoff_time(double cutoff_days_before_tca) const noexcept {
        return window_days - cutoff_days_before_tca;
    }
};

// Header must name `event_id`, `tca` and `creation_date` (any order, extra
// columns ignored; an optional `message_id` column is picked up).
[[nodiscard]] std::vector<CdmRecord> parse_csv(std::string_view text);

[[nodiscard]] CdmRecord parse_kvn(std::string_view text);

// KVN convention: MESSAGE_ID with its last `.suffix` stripped.
[[nodiscard]] std::string event_id_from_message_id(std::string_view message_id);

struct AssemblyResult {
    std::vector<ConjunctionEvent> events;  // ordered by event_id
    std::vector<std::string> warnings;     // one per dropped record
};

// Groups records by event, maps creation times into window coordinates
// against the TCA of the most recently created record, drops records that
// fall outside the window and collapses duplicate creation times.
[[nodiscard]] AssemblyResult assemble_events(const std::vector<CdmRecord>& records, double window_days);

// Inverse of assemble_events for the CSV schema; creation times are rounded
// to the nearest second.
[[nodiscard]] std::string events_to_csv(const std::vector<ConjunctionEvent>& events);

struct HistorySplit {
    double cutoff_t{};
    std::vector<double> history;  // t <= cutoff_t
    std::vector<double> future;   // t > cutoff_t
};

// Throws InsufficientHistory when no arrival precedes the cutoff.
[[nodiscard]] HistorySplit split_at_cutoff(const ConjunctionEvent& event, double cutoff_days_before_tca);

} // namespace cadence
