#pragma once

#include <string>
#include <vector>

#include "mindtrail/model.hpp"
#include "mindtrail/serialize.hpp"

namespace mindtrail {

struct Finding {
    std::string invariant;  // short machine-friendly name
    std::string locator;    // e.g. themes[1].questions[0].comments[2]
    std::string message;
};

/// Narrative, every current answer and every answer text ever recorded in
/// the event log, newline separated. Grounding of stored quotes is checked
/// against this, since a quote may come from an answer that was later edited.
std::string historical_corpus(const Session& session, const std::vector<EventRecord>& events);

/// Runs every model, pipeline and event-log invariant. Empty result means valid.
std::vector<Finding> validate_record(const StoreRecord& record);
std::vector<Finding> validate_session(const Session& session, const std::vector<EventRecord>& events,
                                      std::size_t summary_allowance = 600);

}  // namespace mindtrail
