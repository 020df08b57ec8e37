#include "scribe/reflection/reflection.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "scribe/providers/digest.hpp"

namespace scribe::reflection {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string trim(std::string_view s) {
    auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string_view::npos) return "";
    auto end = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(begin, end - begin + 1));
}

std::string_view criterion_definition(Criterion criterion) {
    switch (criterion) {
        case Criterion::Reliability: return "claims are backed by the cited sources";
        case Criterion::Engagement: return "the material holds a reader's interest";
        case Criterion::Informativeness: return "the content adds substantive breadth and depth";
        case Criterion::Coherence: return "ideas connect and flow logically";
        case Criterion::Readability: return "phrasing is clear and easy to follow";
        case Criterion::Consistency: return "statements agree with each other and with the topic";
        case Criterion::Helpfulness: return "the material serves the reader's needs";
    }
    return "";
}

std::string_view viewpoint_system_prompt(Viewpoint viewpoint) {
    switch (viewpoint) {
        case Viewpoint::Supervisor:
            return "You are the supervising editor of a reference work. Evaluate the material "
                   "against the listed criteria, then hand it to the role best placed to act.";
        case Viewpoint::Writer:
            return "You are the staff writer on an editorial board. Evaluate the material "
                   "against the listed criteria and give targeted improvement suggestions.";
        case Viewpoint::Reader:
            return "You are a reader on an editorial board. Judge how the material lands for "
                   "someone encountering the topic fresh.";
        case Viewpoint::Editor:
            return "You are the managing editor on an editorial board. Judge how well the images "
                   "and their accompanying text work together.";
    }
    return "";
}

constexpr const char* kOutputContract =
    "Reply using exactly these line formats and nothing else:\n"
    "FINDING: <criterion>: <observation>\n"
    "SUGGESTION: <concrete improvement>\n"
    "VERDICT: accept|revise\n"
    "A revise verdict requires at least one SUGGESTION line.";

constexpr const char* kRouteContract =
    "ROUTE: writer|reader|editor  (the role that should act next)";

constexpr const char* kFormatReminder =
    "Your previous reply did not follow the required format. Reply again using only "
    "FINDING:/SUGGESTION:/VERDICT: lines (and ROUTE: if you were asked to route).";

Viewpoint stage_default_route(Stage stage) {
    switch (stage) {
        case Stage::Exploration:
        case Stage::Drafting: return Viewpoint::Writer;
        case Stage::Placement: return Viewpoint::Reader;
        case Stage::Polishing: return Viewpoint::Editor;
    }
    return Viewpoint::Writer;
}

}  // namespace

const std::vector<Criterion>& allowed_criteria(Viewpoint viewpoint) {
    static const std::vector<Criterion> supervisor{Criterion::Coherence, Criterion::Informativeness,
                                                   Criterion::Consistency};
    static const std::vector<Criterion> writer{Criterion::Reliability,     Criterion::Engagement,
                                               Criterion::Consistency,     Criterion::Informativeness,
                                               Criterion::Coherence,       Criterion::Readability};
    static const std::vector<Criterion> reader{Criterion::Readability, Criterion::Engagement,
                                               Criterion::Helpfulness};
    static const std::vector<Criterion> editor{Criterion::Coherence, Criterion::Consistency,
                                               Criterion::Helpfulness};
    switch (viewpoint) {
        case Viewpoint::Supervisor: return supervisor;
        case Viewpoint::Writer: return writer;
        case Viewpoint::Reader: return reader;
        case Viewpoint::Editor: return editor;
    }
    return writer;
}

ReflectionRequest ReflectionRequest::make(Viewpoint viewpoint, Payload payload,
                                          std::vector<Criterion> criteria, std::string context) {
    if (criteria.empty()) {
        throw_error(Errc::invalid_argument, "reflection request needs at least one criterion");
    }
    const auto& allowed = allowed_criteria(viewpoint);
    for (Criterion criterion : criteria) {
        if (std::find(allowed.begin(), allowed.end(), criterion) == allowed.end()) {
            throw_error(Errc::invalid_argument,
                        std::string(to_string(criterion)) + " is not a " +
                            std::string(to_string(viewpoint)) + " criterion");
        }
    }
    return ReflectionRequest{viewpoint, std::move(payload), std::move(criteria), std::move(context)};
}

ReflectionFeedback parse_feedback(const std::string& text, Viewpoint viewpoint) {
    ReflectionFeedback feedback;
    feedback.viewpoint = viewpoint;
    bool saw_verdict = false;

    std::istringstream stream(text);
    std::string raw_line;
    while (std::getline(stream, raw_line)) {
        std::string line = trim(raw_line);
        if (line.rfind("FINDING:", 0) == 0) {
            std::string rest = trim(line.substr(8));
            auto colon = rest.find(':');
            if (colon == std::string::npos) {
                throw_error(Errc::feedback_parse_error, "FINDING line without a criterion: " + line);
            }
            feedback.findings.push_back(
                Finding{criterion_from_string(lower(trim(rest.substr(0, colon)))),
                        trim(rest.substr(colon + 1))});
        } else if (line.rfind("SUGGESTION:", 0) == 0) {
            std::string suggestion = trim(line.substr(11));
            if (!suggestion.empty()) feedback.suggestions.push_back(std::move(suggestion));
        } else if (line.rfind("VERDICT:", 0) == 0 && !saw_verdict) {
            std::string value = lower(trim(line.substr(8)));
            if (value == "accept") {
                feedback.verdict = Verdict::Accept;
            } else if (value == "revise") {
                feedback.verdict = Verdict::Revise;
            } else {
                throw_error(Errc::feedback_parse_error, "unknown verdict: " + value);
            }
            saw_verdict = true;
        } else if (line.rfind("ROUTE:", 0) == 0 && viewpoint == Viewpoint::Supervisor) {
            std::string value = lower(trim(line.substr(6)));
            // Only the three actionable roles are valid targets; anything
            // else leaves routing to the stage default.
            if (value == "writer") feedback.route_to = Viewpoint::Writer;
            else if (value == "reader") feedback.route_to = Viewpoint::Reader;
            else if (value == "editor") feedback.route_to = Viewpoint::Editor;
        }
    }

    if (!saw_verdict) {
        throw_error(Errc::feedback_parse_error, "reply carries no VERDICT line");
    }
    if (feedback.verdict == Verdict::Revise && feedback.suggestions.empty()) {
        throw_error(Errc::feedback_parse_error, "revise verdict without suggestions");
    }
    return feedback;
}

std::string feedback_to_markup(const ReflectionFeedback& feedback) {
    std::ostringstream out;
    for (const auto& finding : feedback.findings) {
        out << "FINDING: " << to_string(finding.criterion) << ": " << finding.note << '\n';
    }
    for (const auto& suggestion : feedback.suggestions) {
        out << "SUGGESTION: " << suggestion << '\n';
    }
    out << "VERDICT: " << to_string(feedback.verdict) << '\n';
    if (feedback.route_to) {
        out << "ROUTE: " << to_string(*feedback.route_to) << '\n';
    }
    return out.str();
}

void FeedbackLog::append(const std::string& digest, const ReflectionFeedback& feedback) {
    std::lock_guard lock(mutex_);
    entries_.emplace_back(digest, feedback);
}

nlohmann::json FeedbackLog::to_json() const {
    std::lock_guard lock(mutex_);
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [digest, feedback] : entries_) {
        arr.push_back({{"request_digest", digest}, {"feedback", feedback}});
    }
    return arr;
}

std::size_t FeedbackLog::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

Engine::Engine(std::shared_ptr<providers::ChatClient> judge, std::shared_ptr<FeedbackLog> log)
    : judge_(std::move(judge)), log_(std::move(log)) {}

ReflectionFeedback Engine::reflect(const ReflectionRequest& request) {
    std::ostringstream user;
    if (!request.context.empty()) {
        user << "Context:\n" << request.context << "\n\n";
    }
    user << "Criteria to judge:\n";
    for (Criterion criterion : request.criteria) {
        user << "- " << to_string(criterion) << ": " << criterion_definition(criterion) << '\n';
    }
    user << "\nMaterial under review (" << to_string(request.payload.kind) << "):\n"
         << request.payload.content << '\n';

    std::string system(viewpoint_system_prompt(request.viewpoint));
    system += "\n";
    system += kOutputContract;
    if (request.viewpoint == Viewpoint::Supervisor) {
        system += "\n";
        system += kRouteContract;
    }

    providers::ChatRequest chat;
    chat.model_tag = judge_->model_tag();
    chat.messages = {{providers::Role::System, system}, {providers::Role::User, user.str()}};
    chat.attachments = request.payload.images;

    auto digest = providers::request_digest("chat", nlohmann::json(chat));
    auto reply = judge_->chat(chat);
    try {
        auto feedback = parse_feedback(reply.text, request.viewpoint);
        if (log_) log_->append(digest, feedback);
        return feedback;
    } catch (const Error& e) {
        if (e.code() != Errc::feedback_parse_error) throw;
    }

    // One re-prompt with a format reminder, then give up.
    chat.messages.push_back({providers::Role::Assistant, reply.text});
    chat.messages.push_back({providers::Role::User, kFormatReminder});
    digest = providers::request_digest("chat", nlohmann::json(chat));
    reply = judge_->chat(chat);
    auto feedback = parse_feedback(reply.text, request.viewpoint);
    if (log_) log_->append(digest, feedback);
    return feedback;
}

ReflectionFeedback Engine::supervise(const Payload& payload, Stage stage, const std::string& context) {
    auto request = ReflectionRequest::make(
        Viewpoint::Supervisor, payload, allowed_criteria(Viewpoint::Supervisor),
        context + "\nPipeline stage: " + std::string(to_string(stage)));
    auto feedback = reflect(request);
    if (!feedback.route_to) {
        feedback.route_to = stage_default_route(stage);
    }
    return feedback;
}

std::string_view to_string(Viewpoint viewpoint) {
    switch (viewpoint) {
        case Viewpoint::Supervisor: return "supervisor";
        case Viewpoint::Writer: return "writer";
        case Viewpoint::Reader: return "reader";
        case Viewpoint::Editor: return "editor";
    }
    return "writer";
}

std::string_view to_string(Criterion criterion) {
    switch (criterion) {
        case Criterion::Reliability: return "reliability";
        case Criterion::Engagement: return "engagement";
        case Criterion::Informativeness: return "informativeness";
        case Criterion::Coherence: return "coherence";
        case Criterion::Readability: return "readability";
        case Criterion::Consistency: return "consistency";
        case Criterion::Helpfulness: return "helpfulness";
    }
    return "coherence";
}

std::string_view to_string(Verdict verdict) {
    return verdict == Verdict::Accept ? "accept" : "revise";
}

std::string_view to_string(Stage stage) {
    switch (stage) {
        case Stage::Exploration: return "exploration";
        case Stage::Drafting: return "drafting";
        case Stage::Placement: return "placement";
        case Stage::Polishing: return "polishing";
    }
    return "exploration";
}

std::string_view to_string(PayloadKind kind) {
    switch (kind) {
        case PayloadKind::TranscriptExcerpt: return "transcript excerpt";
        case PayloadKind::SectionDraft: return "section draft";
        case PayloadKind::PlacementProposal: return "placement proposal";
        case PayloadKind::ImageTextPair: return "image-text pair";
    }
    return "section draft";
}

Viewpoint viewpoint_from_string(std::string_view name) {
    if (name == "supervisor") return Viewpoint::Supervisor;
    if (name == "writer") return Viewpoint::Writer;
    if (name == "reader") return Viewpoint::Reader;
    if (name == "editor") return Viewpoint::Editor;
    throw_error(Errc::invalid_argument, "unknown viewpoint: " + std::string(name));
}

Criterion criterion_from_string(std::string_view name) {
    for (Criterion criterion : kAllCriteria) {
        if (name == to_string(criterion)) return criterion;
    }
    throw_error(Errc::feedback_parse_error, "unknown criterion: " + std::string(name));
}

void to_json(nlohmann::json& j, const ReflectionFeedback& v) {
    nlohmann::json findings = nlohmann::json::array();
    for (const auto& finding : v.findings) {
        findings.push_back({{"criterion", to_string(finding.criterion)}, {"note", finding.note}});
    }
    j = nlohmann::json{{"viewpoint", to_string(v.viewpoint)},
                       {"findings", findings},
                       {"suggestions", v.suggestions},
                       {"verdict", to_string(v.verdict)}};
    if (v.route_to) j["route_to"] = to_string(*v.route_to);
}

void from_json(const nlohmann::json& j, ReflectionFeedback& v) {
    v = ReflectionFeedback{};
    v.viewpoint = viewpoint_from_string(j.at("viewpoint").get<std::string>());
    for (const auto& item : j.at("findings")) {
        v.findings.push_back(Finding{criterion_from_string(item.at("criterion").get<std::string>()),
                                     item.at("note").get<std::string>()});
    }
    j.at("suggestions").get_to(v.suggestions);
    v.verdict = j.at("verdict").get<std::string>() == "accept" ? Verdict::Accept : Verdict::Revise;
    if (j.contains("route_to")) v.route_to = viewpoint_from_string(j.at("route_to").get<std::string>());
}

}  // namespace scribe::reflection
