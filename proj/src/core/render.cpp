#include <sstream>

#include "scribe/core/types.hpp"

namespace scribe::core {

std::string to_markdown(const ArticleDraft& article) {
    std::ostringstream out;
    bool first = true;
    for (const auto& section : article.sections) {
        if (!first) out << '\n';
        first = false;
        out << "## " << section.heading << "\n";
        for (const auto& paragraph : section.paragraphs) {
            out << '\n' << paragraph.text;
            for (std::size_t index : paragraph.citation_indices) {
                out << " [" << (index + 1) << ']';
            }
            out << '\n';
        }
    }
    if (!article.references.empty()) {
        out << "\n## References\n\n";
        for (std::size_t i = 0; i < article.references.size(); ++i) {
            const auto& reference = article.references[i];
            out << (i + 1) << ". [" << reference.title << "](" << reference.url << ")\n";
        }
    }
    return out.str();
}

}  // namespace scribe::core
