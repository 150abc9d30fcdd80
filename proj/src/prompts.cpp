#include "remod/prompts.hpp"

#include <filesystem>
#include <fstream>
#include <vector>

#include "remod/error.hpp"

#include "prompts_builtin.inc"

namespace remod {

PromptLibrary PromptLibrary::builtin_defaults() {
    PromptLibrary lib;
    for (const auto& t : detail::kBuiltinTemplates) lib.templates_[t.name] = t.text;
    return lib;
}

PromptLibrary PromptLibrary::load_dir(const std::string& dir) {
    PromptLibrary lib = builtin_defaults();
    if (dir.empty()) return lib;
    std::filesystem::path root(dir);
    if (!std::filesystem::is_directory(root))
        throw Error(Errc::config_error, "template directory not found: " + dir);
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(root)) {
        if (entry.path().extension() == ".tmpl") files.push_back(entry.path());
    }
    for (const auto& path : files) {
        std::ifstream in(path);
        if (!in) throw Error(Errc::io_error, "cannot read template " + path.string());
        lib.templates_[path.stem().string()] = {std::istreambuf_iterator<char>(in),
                                                std::istreambuf_iterator<char>()};
    }
    return lib;
}

bool PromptLibrary::has(const std::string& name) const { return templates_.count(name) != 0; }

const std::string& PromptLibrary::raw(const std::string& name) const {
    auto it = templates_.find(name);
    if (it == templates_.end())
        throw Error(Errc::config_error, "no prompt template named '" + name + "'");
    return it->second;
}

std::string PromptLibrary::render(const std::string& name,
                                  const std::map<std::string, std::string>& vars) const {
    const std::string& tpl = raw(name);
    std::string out;
    out.reserve(tpl.size());
    std::size_t i = 0;
    while (i < tpl.size()) {
        char c = tpl[i];
        if (c != '{') {
            out.push_back(c);
            ++i;
            continue;
        }
        // Placeholders are {lower_snake_case}; anything else (JSON braces in
        // instructions, etc.) passes through untouched.
        std::size_t j = i + 1;
        while (j < tpl.size() && (std::islower(static_cast<unsigned char>(tpl[j])) ||
                                  tpl[j] == '_' || std::isdigit(static_cast<unsigned char>(tpl[j]))))
            ++j;
        if (j > i + 1 && j < tpl.size() && tpl[j] == '}') {
            std::string key = tpl.substr(i + 1, j - i - 1);
            auto it = vars.find(key);
            if (it == vars.end())
                throw Error(Errc::config_error,
                            "template '" + name + "' placeholder {" + key + "} has no binding");
            out += it->second;
            i = j + 1;
        } else {
            out.push_back(c);
            ++i;
        }
    }
    return out;
}

const std::vector<std::string>& PromptLibrary::template_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& t : detail::kBuiltinTemplates) out.emplace_back(t.name);
        return out;
    }();
    return names;
}

}  // namespace remod
