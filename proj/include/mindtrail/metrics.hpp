#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mindtrail/model.hpp"

namespace mindtrail::metrics {

// Hangul syllable block code points; every other character counts 0.
std::int64_t count_syllables(std::string_view text, std::string_view locale = "ko");

struct UsageRow {
    std::int64_t narrative_syllables{0};
    std::int64_t total_response_syllables{0};
    std::int64_t theme_count{0};
    std::int64_t question_count{0};
    std::int64_t revealed_keyword_count{0};
    std::int64_t user_comment_request_count{0};

    bool operator==(const UsageRow&) const = default;
};

UsageRow usage_row(const Session& session);

inline constexpr std::array<std::string_view, 6> kColumns{
    "narrative_syllables", "total_response_syllables",  "theme_count",
    "question_count",      "revealed_keyword_count",    "user_comment_request_count"};

std::vector<double> row_values(const UsageRow& row);

struct ColumnStats {
    double mean{0};
    double sample_sd{0};
    double min{0};
    double max{0};
};

/// Full-precision statistics; throws InsufficientRows with fewer than 2 values.
ColumnStats aggregate(const std::vector<double>& values);
/// One entry per UsageRow column, in kColumns order.
std::vector<ColumnStats> aggregate(const std::vector<UsageRow>& rows);

/// Half-up rounding to `digits` decimals, used only when reporting.
double round_half_up(double value, int digits = 2);
std::string format_fixed(double value, int digits = 2);

struct Segment {
    Page phase{Page::narrative};
    Timestamp start{0};
    Timestamp end{0};

    bool operator==(const Segment&) const = default;
};

struct PhaseTimeline {
    std::vector<Segment> segments;
    bool flagged{false};
    std::vector<std::string> notes;  // why the sequence was flagged
};

PhaseTimeline phase_timeline(const std::vector<EventRecord>& events);

struct LabeledRow {
    std::string label;
    UsageRow row;
};

/// One line per row plus Mean and SD footers (footers need at least 2 rows).
std::string render_csv(const std::vector<LabeledRow>& rows);
std::string render_table(const std::vector<LabeledRow>& rows);

}  // namespace mindtrail::metrics
