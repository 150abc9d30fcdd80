#pragma once

#include <string>
#include <vector>

#include "remod/domain.hpp"

namespace remod {

struct CorpusLoad {
    std::vector<Sample> samples;
    std::vector<std::string> warnings;  // skipped lines, with line numbers
};

/// Reads a JSON Lines corpus (UTF-8, one object per line). Line-level
/// validation failures either abort with an aggregated error or, with
/// skip_errors, are collected as warnings. Duplicate ids are detected across
/// the whole file.
CorpusLoad load_dataset(const std::string& path, const LabelSet& labels, bool skip_errors);

}  // namespace remod
