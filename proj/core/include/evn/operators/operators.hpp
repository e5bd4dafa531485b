#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "evn/core/state_machine.hpp"
#include "evn/core/types.hpp"
#include "evn/gateway/gateway.hpp"

namespace evn::operators {

using gateway::Gateway;

/// Supplies the researcher's answer to a question; `turn` counts from 1.
/// Returning nullopt cancels the session.
using Answerer = std::function<std::optional<std::string>(const std::string& question, int turn)>;

inline constexpr const char* kFillerAnswer = "I'm not sure, that's all I have";

/// Bench policy: turn 1 is answered with the item's second paragraph, every
/// later turn with kFillerAnswer.
Answerer batch_answerer(std::string paragraph2);

/// Answers from `answers` in order, then kFillerAnswer.
Answerer scripted_answerer(std::vector<std::string> answers);

/// m̂ as handed to the necessity check.
struct MethodDescription {
    std::string text;
    std::vector<std::string> components;
};

/// Splits the trace's method stage into bullet items, or sentences when it
/// has no bullets.
MethodDescription describe_method(const DerivationTrace& trace);

/// Profile used when elicitation is disabled: the raw input stands in for
/// every field.
ResearcherProfile stub_profile(const TacitInput& input);

/// Transcript as "Q1: ...\nA1: ..." lines.
std::string format_transcript(const std::vector<DialogueTurn>& transcript);

// Elicitation, one step at a time (the service drives these individually).

/// Issues the Turn-0 question, or a Turn-N question after an answer.
void ask_question(SessionState& session, Gateway& gw);
void record_answer(SessionState& session, std::string text);
/// Formalizes the transcript into a profile (stub profile under disable_E).
void formalize_profile(SessionState& session, Gateway& gw);

/// Full elicitation loop. Cancel -> phase Failed("user cancel") and
/// Error{ElicitationAborted}.
void elicit(SessionState& session, Gateway& gw, const Answerer& answer);

/// Anchors, candidate directions, hard anchor filter and the default d* pick.
/// Resumes from ProfileReady or AnchorsReady.
void anchor_and_candidates(SessionState& session, Gateway& gw, const std::string& abstracts = {});

/// Assumption scoring, local argmax, reframing and the derivation trace.
/// Resumes from DirectionsReady, AssumptionsScored or Reframed. Under
/// disable_V the trace is built locally from d*.
void violate_and_reframe(SessionState& session, Gateway& gw);

void check_necessity(SessionState& session, Gateway& gw);

/// Final proposal. The necessity report, when present, is bound verbatim.
void assemble(SessionState& session, Gateway& gw);

/// Header lines the assembled proposal must carry.
const std::vector<std::string>& required_proposal_sections();
/// Header lines the baseline proposal must carry.
const std::vector<std::string>& required_baseline_sections();
/// Required headers absent from `markdown` (matched on header text,
/// ignoring '#' depth and case).
std::vector<std::string> missing_sections(const std::string& markdown, const std::vector<std::string>& required);

/// Text bound to the assembly prompt's necessity slot.
std::string necessity_context(const NecessityReport& report);

/// Two-turn prompt baseline.
Proposal run_baseline(const std::string& topic, const std::string& para1, const std::string& para2, Gateway& gw);

/// Runs the next non-interactive operator for the session's phase. Throws
/// Error{IllegalTransition} while a question awaits an answer or when the
/// session is terminal.
void advance_one(SessionState& session, Gateway& gw, const std::string& abstracts = {});

/// Drives a session from its current phase to Assembled. Failures move the
/// session to Failed(reason) and are rethrown.
void run_pipeline(SessionState& session, Gateway& gw, const Answerer& answer, const std::string& abstracts = {});

}  // namespace evn::operators
