#pragma once

#include <map>
#include <string>
#include <vector>

namespace remod {

/// Prompt templates keyed by operation name. Templates use {placeholder}
/// substitution; placeholders are lowercase identifiers. Editable copies live
/// under templates/ in the repository; the compiled-in defaults are identical
/// and used when no directory is configured.
class PromptLibrary {
public:
    static PromptLibrary builtin_defaults();

    /// Loads every *.tmpl file in dir (name = file stem). Operations missing
    /// from the directory fall back to the builtin default.
    static PromptLibrary load_dir(const std::string& dir);

    bool has(const std::string& name) const;
    const std::string& raw(const std::string& name) const;

    /// Replaces each {var}; throws ConfigError on a placeholder with no
    /// binding. Unused bindings are fine.
    std::string render(const std::string& name,
                       const std::map<std::string, std::string>& vars) const;

    static const std::vector<std::string>& template_names();

private:
    std::map<std::string, std::string> templates_;
};

}  // namespace remod
