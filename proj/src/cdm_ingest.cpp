#include "cadence/cdm_ingest.hpp"

#include "cadence/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <tuple>

namespace cadence {

namespace {

using namespace std::chrono;

bool read_int(std::string_view text, std::size_t pos, std::size_t len, int& out) {
    if (pos + len > text.size()) {
        return false;
    }
    for (std::size_t i = pos; i < pos + len; ++i) {
        if (text[i] < '0' || text[i] > '9') {
            return false;
        }
    }
    auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, out);
    return ec == std::errc{} && ptr == text.data() + pos + len;
}

std::string_view trim(std::string_view s) {
    const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
    while (!s.empty() && is_space(s.front())) {
        s.remove_prefix(1);
    }
    while (!s.empty() && is_space(s.back())) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto nl = text.find('\n', start);
        auto line = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        lines.push_back(line);
        if (nl == std::string_view::npos) {
            break;
        }
        start = nl + 1;
    }
    return lines;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        fields.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return fields;
}

double days_between(UtcTime earlier, UtcTime later) {
    return static_cast<double>((later - earlier).count()) / kSecondsPerDay;
}

} // namespace

std::optional<UtcTime> parse_utc(std::string_view text) {
    text = trim(text);
    if (!text.empty() && text.back() == 'Z') {
        text.remove_suffix(1);
    }
    // YYYY-MM-DDThh:mm:ss
    if (text.size() < 19 || text[4] != '-' || text[7] != '-' || text[10] != 'T' || text[13] != ':' ||
        text[16] != ':') {
        return std::nullopt;
    }
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    if (!read_int(text, 0, 4, y) || !read_int(text, 5, 2, mo) || !read_int(text, 8, 2, d) ||
        !read_int(text, 11, 2, h) || !read_int(text, 14, 2, mi) || !read_int(text, 17, 2, s)) {
        return std::nullopt;
    }
    if (text.size() > 19) {
        if (text[19] != '.' || text.size() == 20) {
            return std::nullopt;
        }
        for (std::size_t i = 20; i < text.size(); ++i) {
            if (text[i] < '0' || text[i] > '9') {
                return std::nullopt;
            }
        }
    }
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h > 23 || mi > 59 || s > 60) {
        return std::nullopt;
    }
    return sys_days{ymd} + hours{h} + minutes{mi} + seconds{s};
}

std::string format_utc(UtcTime time) {
    const auto day_point = floor<days>(time);
    const year_month_day ymd{day_point};
    const hh_mm_ss hms{time - day_point};
    char buf[64];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02lldZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<long>(hms.hours().count()), static_cast<long>(hms.minutes().count()),
                  static_cast<long long>(hms.seconds().count()));
    return buf;
}

std::vector<CdmRecord> parse_csv(std::string_view text) {
    const auto lines = split_lines(text);
    if (lines.empty() || trim(lines.front()).empty()) {
        throw FormatError("CSV header missing");
    }
    const auto header = split_fields(lines.front());
    std::optional<std::size_t> col_event, col_tca, col_creation, col_message;
    for (std::size_t i = 0; i < header.size(); ++i) {
        auto name = header[i];
        if (i == 0 && name.starts_with("\xEF\xBB\xBF")) {
            name.remove_prefix(3);
        }
        if (name == "event_id") col_event = i;
        else if (name == "tca") col_tca = i;
        else if (name == "creation_date") col_creation = i;
        else if (name == "message_id") col_message = i;
    }
    if (!col_event || !col_tca || !col_creation) {
        throw FormatError("malformed CSV header: expected columns event_id,tca,creation_date");
    }
    const std::size_t needed = std::max({*col_event, *col_tca, *col_creation}) + 1;

    std::vector<CdmRecord> records;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const std::size_t line_no = li + 1;
        if (trim(lines[li]).empty()) {
            continue;
        }
        const auto fields = split_fields(lines[li]);
        if (fields.size() < needed) {
            throw RowError(line_no, "expected at least " + std::to_string(needed) + " fields");
        }
        CdmRecord rec;
        rec.event_id = std::string(fields[*col_event]);
        if (rec.event_id.empty()) {
            throw RowError(line_no, "empty event_id");
        }
        const auto tca = parse_utc(fields[*col_tca]);
        if (!tca) {
            throw RowError(line_no, "unparseable tca '" + std::string(fields[*col_tca]) + "'");
        }
        const auto created = parse_utc(fields[*col_creation]);
        if (!created) {
            throw RowError(line_no, "unparseable creation_date '" + std::string(fields[*col_creation]) + "'");
        }
        rec.tca = *tca;
        rec.creation_date = *created;
        if (col_message && *col_message < fields.size() && !fields[*col_message].empty()) {
            rec.message_id = std::string(fields[*col_message]);
        }
        records.push_back(std::move(rec));
    }
    return records;
}

std::string event_id_from_message_id(std::string_view message_id) {
    const auto dot = message_id.rfind('.');
    if (dot == std::string_view::npos || dot == 0) {
        return std::string(message_id);
    }
    return std::string(message_id.substr(0, dot));
}

CdmRecord parse_kvn(std::string_view text) {
    std::optional<UtcTime> creation, tca;
    std::optional<std::string> message_id;
    for (const auto raw : split_lines(text)) {
        const auto line = trim(raw);
        if (line.empty() || line.starts_with("COMMENT")) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            continue;
        }
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (key == "CREATION_DATE" || key == "TCA") {
            const auto parsed = parse_utc(value);
            if (!parsed) {
                throw FormatError("unparseable " + std::string(key) + " '" + std::string(value) + "'");
            }
            (key == "TCA" ? tca : creation) = parsed;
        } else if (key == "MESSAGE_ID") {
            message_id = std::string(value);
        }
    }
    if (!creation) {
        throw FormatError("CREATION_DATE missing");
    }
    if (!tca) {
        throw FormatError("TCA missing");
    }
    if (!message_id || message_id->empty()) {
        throw FormatError("MESSAGE_ID missing");
    }
    CdmRecord rec;
    rec.event_id = event_id_from_message_id(*message_id);
    rec.creation_date = *creation;
    rec.tca = *tca;
    rec.message_id = message_id;
    return rec;
}

AssemblyResult assemble_events(const std::vector<CdmRecord>& records, double window_days) {
    if (!(window_days > 0.0) || !std::isfinite(window_days)) {
        throw ArgumentError("window_days must be positive");
    }
    std::map<std::string, std::vector<const CdmRecord*>> groups;
    for (const auto& rec : records) {
        groups[rec.event_id].push_back(&rec);
    }

    AssemblyResult result;
    for (auto& [event_id, group] : groups) {
        // Latest creation wins; ties resolved by the later TCA so the outcome
        // does not depend on input order.
        const auto* latest = *std::max_element(group.begin(), group.end(), [](const auto* a, const auto* b) {
            return std::tie(a->creation_date, a->tca) < std::tie(b->creation_date, b->tca);
        });
        ConjunctionEvent event;
        event.event_id = event_id;
        event.tca = latest->tca;
        event.window_days = window_days;

        std::vector<UtcTime> kept;
        for (const auto* rec : group) {
            if (rec->creation_date > rec->tca) {
                result.warnings.push_back(event_id + ": dropped record created " + format_utc(rec->creation_date) +
                                          " after its TCA " + format_utc(rec->tca));
                continue;
            }
            const double t = window_days - days_between(rec->creation_date, event.tca);
            if (t < 0.0 || t > window_days) {
                result.warnings.push_back(event_id + ": dropped record created " + format_utc(rec->creation_date) +
                                          " outside the " + std::to_string(window_days) + "-day window");
                continue;
            }
            kept.push_back(rec->creation_date);
        }
        std::sort(kept.begin(), kept.end());
        kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
        if (kept.empty()) {
            continue;
        }
        event.arrivals.reserve(kept.size());
        for (const auto created : kept) {
            event.arrivals.push_back(window_days - days_between(created, event.tca));
        }
        result.events.push_back(std::move(event));
    }
    return result;
}

std::string events_to_csv(const std::vector<ConjunctionEvent>& events) {
    std::ostringstream out;
    out << "event_id,tca,creation_date\n";
    for (const auto& event : events) {
        const auto tca = format_utc(event.tca);
        for (const double t : event.arrivals) {
            const auto before = std::chrono::seconds{std::llround((event.window_days - t) * kSecondsPerDay)};
            out << event.event_id << ',' << tca << ',' << format_utc(event.tca - before) << '\n';
        }
    }
    return out.str();
}

HistorySplit split_at_cutoff(const ConjunctionEvent& event, double cutoff_days_before_tca) {
    if (!(cutoff_days_before_tca > 0.0) || !(cutoff_days_before_tca < event.window_days)) {
        throw ArgumentError("cutoff must lie strictly inside (0, window_days)");
    }
    HistorySplit split;
    split.cutoff_t = event.cutoff_time(cutoff_days_before_tca);
    const auto boundary = std::upper_bound(event.arrivals.begin(), event.arrivals.end(), split.cutoff_t);
    split.history.assign(event.arrivals.begin(), boundary);
    split.future.assign(boundary, event.arrivals.end());
    if (split.history.empty()) {
        throw InsufficientHistory("no CDM at or before " + std::to_string(cutoff_days_before_tca) +
                                  " days to TCA in event " + event.event_id);
    }
    return split;
}

} // namespace cadence
