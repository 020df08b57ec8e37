#pragma once

#include <string>
#include <vector>

#include "scribe/core/types.hpp"
#include "scribe/exploration/exploration.hpp"
#include "scribe/outline/outline.hpp"
#include "scribe/providers/clients.hpp"
#include "scribe/reflection/reflection.hpp"

namespace scribe::composer {

// Condensed evidence for one section. evidence_indices point into the
// EvidenceBank the notes were summarized from.
struct SectionNotes {
    std::string section_heading;
    struct Bullet {
        std::string claim;
        std::vector<std::size_t> evidence_indices;
    };
    std::vector<Bullet> bullets;

    // Unique bank indices in first-use order across the bullets. Prose
    // citation markers are 1-based labels into this list: [1] is the first
    // entry, [0] is malformed. Parsed sections store the mapped bank indices.
    std::vector<std::size_t> evidence_universe() const;
};

struct ComposeOptions {
    int max_reflect_iters = 3;
    bool full_article_context = false;  // include all prior text, not a running summary
};

// Condenses the bank entries tagged for this section (the whole bank when
// none are) into cited bullets. Empty bank yields empty notes without a
// model call. One re-prompt, then NotesParseError.
SectionNotes summarize_evidence(const exploration::EvidenceBank& bank,
                                const outline::OutlineSection& section,
                                const providers::ProviderHub& hub);

// Drafts the section from its notes. Paragraphs are split on blank lines;
// bracketed markers are validated against the notes' label range, stripped
// from the stored text, and kept as citation indices.
core::Section draft_section(const outline::OutlineSection& section, const SectionNotes& notes,
                            const std::string& prior_context, const providers::ProviderHub& hub);

// Rewrites a section that reflection sent back. Heading and the citation
// universe are preserved; feedback must carry a Revise verdict.
core::Section refine_section(const core::Section& section, const SectionNotes& notes,
                             const reflection::ReflectionFeedback& feedback,
                             const std::string& prior_context, const providers::ProviderHub& hub);

// References become the unique citations actually cited, in first-citation
// order; paragraph citation indices are remapped onto that compacted list.
// Throws DanglingCitation when an index has no bank entry.
core::ArticleDraft assemble_article(const std::string& topic_id,
                                    const std::vector<core::Section>& sections,
                                    const exploration::EvidenceBank& bank);

// Sequential whole-article composition: each section is drafted, pushed
// through the writer refine loop, and feeds a running summary to the next.
core::ArticleDraft compose_article(const std::string& topic_id, const outline::OutlinePlan& plan,
                                   const exploration::EvidenceBank& bank,
                                   const providers::ProviderHub& hub,
                                   reflection::Engine& reflector,
                                   const ComposeOptions& options = {});

// Section text with its markers re-attached, as shown to models and humans.
std::string render_section_markup(const core::Section& section, const SectionNotes& notes);

}  // namespace scribe::composer
