#include "remod/dataset.hpp"

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "remod/error.hpp"

namespace remod {

CorpusLoad load_dataset(const std::string& path, const LabelSet& labels, bool skip_errors) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::io_error, "cannot open corpus " + path);

    CorpusLoad out;
    std::set<std::string> seen_ids;
    std::vector<std::string> errors;
    std::string line;
    std::size_t lineno = 0;

    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        std::string context = path + ":" + std::to_string(lineno);
        try {
            nlohmann::json raw = nlohmann::json::parse(line);
            Sample s = validate_sample(raw, labels);
            if (!seen_ids.insert(s.id).second)
                throw ValidationError(Errc::duplicate_id, "id '" + s.id + "' already used",
                                      {{"id", "duplicate"}});
            out.samples.push_back(std::move(s));
        } catch (const nlohmann::json::exception& e) {
            errors.push_back(context + ": invalid JSON: " + e.what());
        } catch (const Error& e) {
            errors.push_back(context + ": " + e.what());
        }
    }

    if (!errors.empty()) {
        if (!skip_errors) {
            std::string msg = std::to_string(errors.size()) + " invalid corpus line(s):";
            for (const auto& e : errors) msg += "\n  " + e;
            throw Error(Errc::precondition, msg);
        }
        out.warnings = std::move(errors);
    }
    return out;
}

}  // namespace remod
