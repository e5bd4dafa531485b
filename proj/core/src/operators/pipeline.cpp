#include "evn/core/error.hpp"
#include "evn/operators/operators.hpp"

namespace evn::operators {

void advance_one(SessionState& session, Gateway& gw, const std::string& abstracts) {
    switch (session.phase.kind) {
        case PhaseKind::Eliciting:
            if (session.ablation_flags.contains(AblationFlag::DisableE) ||
                session.phase.turns_completed >= session.config_snapshot.elicitation_turns) {
                formalize_profile(session, gw);
            } else if (pending_question(session)) {
                throw Error(ErrorCode::IllegalTransition, "a question is awaiting an answer",
                            {{"phase", to_string(session.phase.kind)}, {"pending_question", *pending_question(session)}});
            } else {
                ask_question(session, gw);
            }
            return;
        case PhaseKind::ProfileReady:
        case PhaseKind::AnchorsReady: anchor_and_candidates(session, gw, abstracts); return;
        case PhaseKind::DirectionsReady:
        case PhaseKind::AssumptionsScored:
        case PhaseKind::Reframed: violate_and_reframe(session, gw); return;
        case PhaseKind::TraceBuilt:
            if (session.ablation_flags.contains(AblationFlag::DisableN)) {
                assemble(session, gw);
            } else {
                check_necessity(session, gw);
            }
            return;
        case PhaseKind::NecessityChecked: assemble(session, gw); return;
        case PhaseKind::Assembled:
        case PhaseKind::Failed: break;
    }
    throw Error(ErrorCode::IllegalTransition, std::string("session is terminal: ") + to_string(session.phase.kind),
                {{"phase", to_string(session.phase.kind)}});
}

void run_pipeline(SessionState& session, Gateway& gw, const Answerer& answer, const std::string& abstracts) {
    try {
        if (session.phase.kind == PhaseKind::Eliciting) elicit(session, gw, answer);
        while (!is_terminal(session.phase.kind)) advance_one(session, gw, abstracts);
    } catch (const Error& e) {
        if (!is_terminal(session.phase.kind))
            session = advance(session, event::OperatorFailed{std::string(to_string(e.code())) + ": " + e.what()});
        throw;
    }
}

}  // namespace evn::operators
