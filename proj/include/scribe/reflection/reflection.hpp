#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scribe/core/types.hpp"
#include "scribe/errors.hpp"
#include "scribe/providers/clients.hpp"

namespace scribe::reflection {

enum class Viewpoint { Supervisor, Writer, Reader, Editor };

enum class Criterion {
    Reliability,
    Engagement,
    Informativeness,
    Coherence,
    Readability,
    Consistency,
    Helpfulness,
};

inline constexpr Criterion kAllCriteria[] = {
    Criterion::Reliability,  Criterion::Engagement,  Criterion::Informativeness,
    Criterion::Coherence,    Criterion::Readability, Criterion::Consistency,
    Criterion::Helpfulness,
};

enum class Verdict { Accept, Revise };

enum class Stage { Exploration, Drafting, Placement, Polishing };

enum class PayloadKind { TranscriptExcerpt, SectionDraft, PlacementProposal, ImageTextPair };

// What gets critiqued: a rendered text body, plus images for image-text
// pairs (they ride along as chat attachments).
struct Payload {
    PayloadKind kind = PayloadKind::SectionDraft;
    std::string content;
    std::vector<core::ImageRef> images;
};

struct Finding {
    Criterion criterion;
    std::string note;

    bool operator==(const Finding&) const = default;
};

// Criteria each viewpoint is allowed to judge.
const std::vector<Criterion>& allowed_criteria(Viewpoint viewpoint);

struct ReflectionRequest {
    Viewpoint viewpoint;
    Payload payload;
    std::vector<Criterion> criteria;
    std::string context;  // topic/outline summary shown to the judge

    // Validates the criteria against the viewpoint's allowed set;
    // throws InvalidArgument on a criterion outside it or an empty list.
    static ReflectionRequest make(Viewpoint viewpoint, Payload payload,
                                  std::vector<Criterion> criteria, std::string context);
};

struct ReflectionFeedback {
    Viewpoint viewpoint = Viewpoint::Writer;
    std::vector<Finding> findings;
    std::vector<std::string> suggestions;
    Verdict verdict = Verdict::Accept;
    std::optional<Viewpoint> route_to;  // supervisor only

    bool operator==(const ReflectionFeedback&) const = default;
};

// Fixed uppercase-key markup the judge is prompted to emit:
//   FINDING: <criterion>: <note>
//   SUGGESTION: <text>
//   VERDICT: accept|revise
//   ROUTE: writer|reader|editor        (supervisor only)
ReflectionFeedback parse_feedback(const std::string& text, Viewpoint viewpoint);
std::string feedback_to_markup(const ReflectionFeedback& feedback);

// Per-run record of every reflection: judge request digest plus the parsed
// feedback, in call order.
class FeedbackLog {
public:
    void append(const std::string& digest, const ReflectionFeedback& feedback);
    nlohmann::json to_json() const;
    std::size_t size() const;

private:
    mutable std::mutex mutex_;
    std::vector<std::pair<std::string, ReflectionFeedback>> entries_;
};

class Engine {
public:
    Engine(std::shared_ptr<providers::ChatClient> judge, std::shared_ptr<FeedbackLog> log = nullptr);

    // Runs the viewpoint-specific rubric over the payload. One re-prompt with
    // a format reminder on unparsable output, then FeedbackParseError.
    ReflectionFeedback reflect(const ReflectionRequest& request);

    // Supervisor pass: evaluates and routes. route_to comes from the stage
    // mapping (Exploration/Drafting -> Writer, Placement -> Reader,
    // Polishing -> Editor) unless the judge names a different valid role.
    ReflectionFeedback supervise(const Payload& payload, Stage stage, const std::string& context);

private:
    std::shared_ptr<providers::ChatClient> judge_;
    std::shared_ptr<FeedbackLog> log_;
};

template <typename Artifact>
struct RefineOutcome {
    Artifact artifact;
    int iterations = 0;  // number of reflect calls performed
    Verdict final_verdict = Verdict::Accept;
};

// Alternates reflect / regenerate until the first Accept or max_iters
// reflections; at most max_iters - 1 regenerations. Errors from either
// callback propagate with the iteration index attached.
template <typename Artifact>
RefineOutcome<Artifact> refine_loop(
    Artifact initial, const std::function<ReflectionFeedback(const Artifact&)>& reflect_fn,
    const std::function<Artifact(const Artifact&, const ReflectionFeedback&)>& regenerate,
    int max_iters) {
    if (max_iters < 1) throw_error(Errc::invalid_argument, "refine_loop needs max_iters >= 1");
    Artifact artifact = std::move(initial);
    for (int iteration = 1;; ++iteration) {
        ReflectionFeedback feedback;
        try {
            feedback = reflect_fn(artifact);
        } catch (const Error& e) {
            throw Error(e.code(), "refine iteration " + std::to_string(iteration) + ": " + e.what());
        }
        if (feedback.verdict == Verdict::Accept || iteration == max_iters) {
            return {std::move(artifact), iteration, feedback.verdict};
        }
        try {
            artifact = regenerate(artifact, feedback);
        } catch (const Error& e) {
            throw Error(e.code(), "refine iteration " + std::to_string(iteration) + ": " + e.what());
        }
    }
}

std::string_view to_string(Viewpoint viewpoint);
std::string_view to_string(Criterion criterion);
std::string_view to_string(Verdict verdict);
std::string_view to_string(Stage stage);
std::string_view to_string(PayloadKind kind);
Viewpoint viewpoint_from_string(std::string_view name);
Criterion criterion_from_string(std::string_view name);

void to_json(nlohmann::json& j, const ReflectionFeedback& v);
void from_json(const nlohmann::json& j, ReflectionFeedback& v);

}  // namespace scribe::reflection
