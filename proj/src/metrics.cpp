#include "mindtrail/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "mindtrail/error.hpp"
#include "mindtrail/text.hpp"

namespace mindtrail::metrics {

std::int64_t count_syllables(std::string_view text, std::string_view /*locale*/) {
    std::int64_t n = 0;
    for (char32_t c : text::decode_utf8(text)) {
        if (c >= 0xAC00 && c <= 0xD7A3) ++n;
    }
    return n;
}

UsageRow usage_row(const Session& session) {
    UsageRow r;
    r.narrative_syllables = count_syllables(session.narrative, session.locale);
    r.theme_count = static_cast<std::int64_t>(session.themes.size());
    for (const auto& t : session.themes) {
        for (const auto& q : t.questions) {
            ++r.question_count;
            r.total_response_syllables += count_syllables(q.answer.text, session.locale);
            // A "more" batch always sets keywords_visible, so this also covers them.
            if (q.keywords_visible) {
                for (const auto& b : q.keyword_batches) r.revealed_keyword_count += std::ssize(b.keywords);
            }
            r.user_comment_request_count +=
                std::count_if(q.comments.begin(), q.comments.end(), [](const Comment& c) { return c.trigger == Trigger::user; });
        }
    }
    return r;
}

std::vector<double> row_values(const UsageRow& row) {
    return {static_cast<double>(row.narrative_syllables),    static_cast<double>(row.total_response_syllables),
            static_cast<double>(row.theme_count),            static_cast<double>(row.question_count),
            static_cast<double>(row.revealed_keyword_count), static_cast<double>(row.user_comment_request_count)};
}

ColumnStats aggregate(const std::vector<double>& values) {
    if (values.size() < 2) {
        throw Error(ErrorCode::InsufficientRows, "sample SD needs at least 2 rows, got " + std::to_string(values.size()));
    }
    const double n = static_cast<double>(values.size());
    ColumnStats s;
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sample_sd = std::sqrt(ss / (n - 1));
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    s.min = *lo;
    s.max = *hi;
    return s;
}

std::vector<ColumnStats> aggregate(const std::vector<UsageRow>& rows) {
    std::vector<ColumnStats> out;
    for (std::size_t c = 0; c < kColumns.size(); ++c) {
        std::vector<double> col;
        col.reserve(rows.size());
        for (const auto& r : rows) col.push_back(row_values(r)[c]);
        out.push_back(aggregate(col));
    }
    return out;
}

double round_half_up(double value, int digits) {
    const double scale = std::pow(10.0, digits);
    // The epsilon keeps 2.675-style binary representations on the intended side.
    const double scaled = std::abs(value) * scale;
    const double r = std::floor(scaled + 0.5 + 1e-9 * std::max(1.0, scaled)) / scale;
    return std::copysign(r, value);
}

std::string format_fixed(double value, int digits) {
    char buf[64];
    double r = round_half_up(value, digits);
    if (r == 0) r = 0;  // no "-0.00"
    std::snprintf(buf, sizeof buf, "%.*f", digits, r);
    return buf;
}

PhaseTimeline phase_timeline(const std::vector<EventRecord>& input) {
    PhaseTimeline tl;
    if (input.empty()) return tl;
    auto events = input;
    if (!std::is_sorted(events.begin(), events.end(),
                        [](const EventRecord& a, const EventRecord& b) { return a.timestamp < b.timestamp; })) {
        std::stable_sort(events.begin(), events.end(),
                         [](const EventRecord& a, const EventRecord& b) { return a.timestamp < b.timestamp; });
        tl.flagged = true;
        tl.notes.push_back("events were not ordered by timestamp");
    }
    const Timestamp first = events.front().timestamp;
    const Timestamp last = events.back().timestamp;

    std::vector<Segment> raw;
    std::optional<Page> current;
    for (const auto& e : events) {
        if (e.kind != EventKind::page_enter && e.kind != EventKind::page_leave) continue;
        auto it = e.payload.find("page");
        const auto page = it == e.payload.end() ? std::nullopt : parse_page(it->second);
        if (!page) {
            tl.flagged = true;
            tl.notes.push_back("page event at " + std::to_string(e.timestamp) + " has no valid page");
            continue;
        }
        if (e.kind == EventKind::page_leave) {
            if (current != page) {
                tl.flagged = true;
                tl.notes.push_back("page_leave(" + std::string(to_string(*page)) + ") at " +
                                   std::to_string(e.timestamp) + " does not match the open phase");
            }
            continue;
        }
        if (!raw.empty()) raw.back().end = e.timestamp;
        raw.push_back({*page, e.timestamp, last});
        current = page;
    }
    if (raw.empty()) {
        tl.flagged = true;
        tl.notes.push_back("no page_enter events");
        return tl;
    }
    if (raw.front().start > first) {
        tl.flagged = true;
        tl.notes.push_back("events before the first page_enter were attributed to its phase");
        raw.front().start = first;
    }
    for (const auto& s : raw) {
        if (s.end == s.start && raw.size() > 1) continue;
        if (!tl.segments.empty() && tl.segments.back().phase == s.phase) {
            tl.segments.back().end = s.end;
        } else if (!tl.segments.empty()) {
            // Keep segments contiguous when a zero-length one was skipped.
            tl.segments.push_back({s.phase, tl.segments.back().end, s.end});
        } else {
            tl.segments.push_back({s.phase, first, s.end});
        }
    }
    if (tl.segments.empty()) tl.segments.push_back({raw.back().phase, first, last});
    return tl;
}

namespace {

std::vector<std::vector<std::string>> table_cells(const std::vector<LabeledRow>& rows) {
    std::vector<std::vector<std::string>> cells;
    std::vector<std::string> header{"session"};
    for (auto c : kColumns) header.emplace_back(c);
    cells.push_back(header);
    for (const auto& r : rows) {
        std::vector<std::string> line{r.label};
        for (double v : row_values(r.row)) line.push_back(std::to_string(static_cast<std::int64_t>(v)));
        cells.push_back(line);
    }
    if (rows.size() >= 2) {
        std::vector<UsageRow> plain;
        for (const auto& r : rows) plain.push_back(r.row);
        const auto stats = aggregate(plain);
        std::vector<std::string> mean{"Mean"}, sd{"SD"};
        for (const auto& s : stats) {
            mean.push_back(format_fixed(s.mean));
            sd.push_back(format_fixed(s.sample_sd));
        }
        cells.push_back(mean);
        cells.push_back(sd);
    }
    return cells;
}

}  // namespace

std::string render_csv(const std::vector<LabeledRow>& rows) {
    std::ostringstream out;
    for (const auto& line : table_cells(rows)) {
        for (std::size_t i = 0; i < line.size(); ++i) {
            const auto& cell = line[i];
            if (i) out << ',';
            if (cell.find_first_of(",\"\n") != std::string::npos) {
                out << '"';
                for (char ch : cell) out << (ch == '"' ? "\"\"" : std::string(1, ch));
                out << '"';
            } else {
                out << cell;
            }
        }
        out << '\n';
    }
    return out.str();
}

std::string render_table(const std::vector<LabeledRow>& rows) {
    const auto cells = table_cells(rows);
    std::vector<std::size_t> width(cells.front().size(), 0);
    for (const auto& line : cells) {
        for (std::size_t i = 0; i < line.size(); ++i) width[i] = std::max(width[i], text::code_point_count(line[i]));
    }
    std::ostringstream out;
    for (const auto& line : cells) {
        for (std::size_t i = 0; i < line.size(); ++i) {
            const auto pad = width[i] - text::code_point_count(line[i]);
            if (i == 0) {
                out << line[i] << std::string(pad, ' ');
            } else {
                out << "  " << std::string(pad, ' ') << line[i];
            }
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace mindtrail::metrics
