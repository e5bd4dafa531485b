#include <algorithm>
#include <cctype>

#include "evn/core/error.hpp"
#include "evn/core/serialization.hpp"
#include "evn/core/validation.hpp"
#include "evn/operators/operators.hpp"

namespace evn::operators {

using gateway::TemplateId;

namespace {

std::string trim(std::string s) {
    const auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
    s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
    s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
    return s;
}

std::vector<std::string> nonblank(const std::string& text) {
    if (trim(text).empty()) return {"reply is empty"};
    return {};
}

}  // namespace

Answerer batch_answerer(std::string paragraph2) {
    return [p2 = std::move(paragraph2)](const std::string&, int turn) -> std::optional<std::string> {
        return turn == 1 ? p2 : std::string(kFillerAnswer);
    };
}

Answerer scripted_answerer(std::vector<std::string> answers) {
    return [list = std::move(answers)](const std::string&, int turn) -> std::optional<std::string> {
        const auto i = static_cast<std::size_t>(turn - 1);
        return i < list.size() ? list[i] : std::string(kFillerAnswer);
    };
}

std::string format_transcript(const std::vector<DialogueTurn>& transcript) {
    std::string out;
    int q = 0;
    int a = 0;
    for (const auto& t : transcript) {
        if (!out.empty()) out += '\n';
        if (t.role == TurnRole::SystemQuestion) {
            out += "Q" + std::to_string(++q) + ": " + t.text;
        } else {
            out += "A" + std::to_string(++a) + ": " + t.text;
        }
    }
    return out;
}

ResearcherProfile stub_profile(const TacitInput& input) {
    ResearcherProfile p;
    p.friction_points = {input.text};
    p.motivation = input.text;
    p.constraints = {"unspecified", "unspecified", "unspecified"};
    p.research_taste = "unspecified";
    p.refined_topic = input.domain_hint ? *input.domain_hint + ": " + input.text : input.text;
    return p;
}

void ask_question(SessionState& session, Gateway& gw) {
    const bool first = session.transcript.empty();
    gateway::Call call;
    if (first) {
        call = gateway::make_call(TemplateId::ElicitTurn0, {{"user_input", session.input.text}});
    } else {
        call = gateway::make_call(TemplateId::ElicitTurnN, {{"topic", session.input.text},
                                                            {"prev_answer", session.transcript.back().text},
                                                            {"transcript", format_transcript(session.transcript)}});
    }
    auto reply = gw.complete_checked(call, nonblank, 2, ErrorCode::SchemaExhausted);
    session = advance(session, event::QuestionAsked{trim(reply.text)});
}

void record_answer(SessionState& session, std::string text) {
    session = advance(session, event::UserAnswered{std::move(text)});
}

void formalize_profile(SessionState& session, Gateway& gw) {
    if (session.ablation_flags.contains(AblationFlag::DisableE)) {
        session = advance(session, event::ProfileFormalized{stub_profile(session.input)});
        return;
    }
    auto call = gateway::make_call(TemplateId::ProfileFormalize, {{"topic", session.input.text},
                                                                  {"transcript", format_transcript(session.transcript)}});
    auto reply = gw.complete_structured(call, gateway::SchemaId::Profile);
    auto profile = std::get<ResearcherProfile>(validate_profile(reply.document));
    session = advance(session, event::ProfileFormalized{std::move(profile)});
}

void elicit(SessionState& session, Gateway& gw, const Answerer& answer) {
    if (session.phase.kind != PhaseKind::Eliciting)
        throw Error(ErrorCode::IllegalTransition, "elicit requires phase eliciting",
                    {{"phase", to_string(session.phase.kind)}});
    if (!session.ablation_flags.contains(AblationFlag::DisableE)) {
        while (session.phase.turns_completed < session.config_snapshot.elicitation_turns) {
            if (!pending_question(session)) ask_question(session, gw);
            const int turn = session.phase.turns_completed + 1;
            auto text = answer(*pending_question(session), turn);
            if (!text) {
                session = advance(session, event::OperatorFailed{"user cancel"});
                throw Error(ErrorCode::ElicitationAborted, "elicitation cancelled by the user", {{"turn", turn}});
            }
            record_answer(session, std::move(*text));
        }
    }
    formalize_profile(session, gw);
}

}  // namespace evn::operators
