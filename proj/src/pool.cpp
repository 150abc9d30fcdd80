#include "remod/pool.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "remod/error.hpp"

namespace remod {

const char* pool_kind_name(PoolKind k) { return k == PoolKind::mep ? "mep" : "sep"; }

InsightKind insight_kind_for(PoolKind k) {
    return k == PoolKind::mep ? InsightKind::modality : InsightKind::semantic;
}

ExperiencePool::ExperiencePool(PoolKind kind, std::size_t d_text, std::size_t d_visual)
    : kind_(kind), d_text_(d_text), d_visual_(d_visual) {
    if (d_text_ == 0 || d_visual_ == 0)
        throw Error(Errc::config_error, "pool key dimensions must be > 0");
}

const Experience* ExperiencePool::find(std::uint64_t id) const {
    for (const auto& e : entries_)
        if (e.id == id) return &e;
    return nullptr;
}

std::uint64_t ExperiencePool::append(const QueryVectors& keys, std::string payload,
                                     const std::string& source_sample) {
    if (trim(payload).empty()) throw Error(Errc::empty_payload, "experience payload is empty");
    if (!keys.text)
        throw Error(Errc::precondition, "experience keys need at least the text side");
    keys.validate();
    if (keys.text->size() != d_text_)
        throw Error(Errc::dimension_mismatch,
                    "key_text dimension " + std::to_string(keys.text->size()) + " vs pool d_text " +
                        std::to_string(d_text_));
    if (keys.visual && keys.visual->size() != d_visual_)
        throw Error(Errc::dimension_mismatch,
                    "key_visual dimension " + std::to_string(keys.visual->size()) +
                        " vs pool d_visual " + std::to_string(d_visual_));

    Experience e;
    e.id = next_id_++;
    e.kind = insight_kind_for(kind_);
    e.key_text = *keys.text;
    e.key_visual = keys.visual;
    e.payload = std::move(payload);
    e.revision = 0;
    if (!source_sample.empty()) e.source_samples.push_back(source_sample);
    e.created_at = e.updated_at = ++step_;
    entries_.push_back(std::move(e));
    return entries_.back().id;
}

// Grants evolve() and the loader entry-level access without widening the
// public API.
struct PoolMutator {
    ExperiencePool& pool;

    Experience& entry(std::uint64_t id) {
        for (auto& e : pool.entries_)
            if (e.id == id) return e;
        throw Error(Errc::precondition, "experience id " + std::to_string(id) + " not in pool");
    }

    std::uint64_t tick() { return ++pool.step_; }

    void push(Experience e) { pool.entries_.push_back(std::move(e)); }

    void set_counters(std::uint64_t next_id, std::uint64_t step) {
        pool.next_id_ = next_id;
        pool.step_ = step;
    }
};

EvolutionRecord evolve(ExperiencePool& pool, const QueryVectors& queries, const Insight& insight,
                       const FuseFn& fuse, const RetrievalParams& params) {
    if (insight.kind != insight_kind_for(pool.kind()))
        throw Error(Errc::precondition,
                    std::string("insight kind ") + insight_kind_name(insight.kind) +
                        " does not match pool " + pool_kind_name(pool.kind()));
    if (trim(insight.text).empty())
        throw Error(Errc::empty_payload, "insight text is empty");

    EvolutionRecord record;
    record.insight_kind = insight.kind;
    record.retrieved = rank_and_filter(pool, queries, params);

    if (record.retrieved.hits.empty()) {
        record.outcome = EvolutionRecord::Outcome::appended;
        record.ids.push_back(pool.append(queries, insight.text, insight.source_sample));
        return record;
    }

    record.outcome = EvolutionRecord::Outcome::updated;
    PoolMutator mut{pool};
    std::uint64_t now = mut.tick();
    for (const auto& hit : record.retrieved.hits) {
        Experience& entry = mut.entry(hit.experience_id);
        std::string fused;
        try {
            fused = fuse(entry.payload, insight.text);
        } catch (const std::exception& e) {
            throw PartialEvolutionError(
                std::string("fusion failed on experience ") + std::to_string(hit.experience_id) +
                    ": " + e.what(),
                record.ids);
        }
        if (trim(fused).empty())
            throw PartialEvolutionError("fuser returned empty payload for experience " +
                                            std::to_string(hit.experience_id),
                                        record.ids);
        entry.payload = std::move(fused);
        entry.revision += 1;
        entry.source_samples.push_back(insight.source_sample);
        entry.updated_at = now;
        record.ids.push_back(entry.id);
    }
    return record;
}

namespace {

nlohmann::json vector_to_json(const std::vector<double>& v) {
    auto arr = nlohmann::json::array();
    for (double x : v) arr.push_back(x);
    return arr;
}

std::vector<double> vector_from_json(const nlohmann::json& arr, std::size_t expected,
                                     std::size_t line, const char* field) {
    if (!arr.is_array())
        throw CorruptPoolError(line, std::string(field) + " is not an array");
    std::vector<double> v;
    v.reserve(arr.size());
    for (const auto& x : arr) {
        if (!x.is_number()) throw CorruptPoolError(line, std::string(field) + " has a non-number");
        v.push_back(x.get<double>());
        if (!std::isfinite(v.back()))
            throw CorruptPoolError(line, std::string(field) + " has a non-finite component");
    }
    if (v.size() != expected)
        throw Error(Errc::dimension_inconsistency,
                    std::string(field) + " on line " + std::to_string(line) + " has " +
                        std::to_string(v.size()) + " components, header declares " +
                        std::to_string(expected));
    return v;
}

}  // namespace

void persist(const ExperiencePool& pool, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(Errc::io_error, "cannot write pool file " + path);

    nlohmann::json header;
    header["format"] = 1;
    header["kind"] = pool_kind_name(pool.kind());
    header["d_t"] = pool.d_text();
    header["d_v"] = pool.d_visual();
    header["next_id"] = pool.next_id();
    header["step"] = pool.step();
    out << header.dump() << '\n';

    for (const auto& e : pool.entries()) {
        nlohmann::json j;
        j["id"] = e.id;
        j["kind"] = insight_kind_name(e.kind);
        j["key_text"] = vector_to_json(e.key_text);
        j["key_visual"] = e.key_visual ? vector_to_json(*e.key_visual) : nlohmann::json(nullptr);
        j["payload"] = e.payload;
        j["revision"] = e.revision;
        j["source_samples"] = e.source_samples;
        j["created_at"] = e.created_at;
        j["updated_at"] = e.updated_at;
        out << j.dump() << '\n';
    }
    if (!out) throw Error(Errc::io_error, "short write to pool file " + path);
}

ExperiencePool load_pool(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::io_error, "cannot open pool file " + path);

    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) throw CorruptPoolError(1, "missing header line");
    ++lineno;

    nlohmann::json header = nlohmann::json::parse(line, nullptr, false);
    if (header.is_discarded()) throw CorruptPoolError(1, "header is not valid JSON");
    if (header.value("format", 0) != 1)
        throw CorruptPoolError(1, "unsupported format version");
    std::string kind_str = header.value("kind", std::string());
    PoolKind kind;
    if (kind_str == "mep")
        kind = PoolKind::mep;
    else if (kind_str == "sep")
        kind = PoolKind::sep;
    else
        throw CorruptPoolError(1, "unknown pool kind '" + kind_str + "'");
    if (!header.contains("d_t") || !header.contains("d_v"))
        throw CorruptPoolError(1, "header missing key dimensions");

    ExperiencePool pool(kind, header["d_t"].get<std::size_t>(), header["d_v"].get<std::size_t>());
    PoolMutator mut{pool};

    std::uint64_t prev_id = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) throw CorruptPoolError(lineno, "entry is not valid JSON");
        for (const char* field :
             {"id", "kind", "key_text", "payload", "revision", "created_at", "updated_at"}) {
            if (!j.contains(field))
                throw CorruptPoolError(lineno, std::string("entry missing '") + field + "'");
        }

        Experience e;
        e.id = j["id"].get<std::uint64_t>();
        std::string ekind = j["kind"].get<std::string>();
        if (ekind != insight_kind_name(insight_kind_for(kind)))
            throw CorruptPoolError(lineno, "entry kind '" + ekind + "' does not match pool");
        e.kind = insight_kind_for(kind);
        e.key_text = vector_from_json(j["key_text"], pool.d_text(), lineno, "key_text");
        if (j.contains("key_visual") && !j["key_visual"].is_null())
            e.key_visual = vector_from_json(j["key_visual"], pool.d_visual(), lineno, "key_visual");
        e.payload = j["payload"].get<std::string>();
        if (trim(e.payload).empty()) throw CorruptPoolError(lineno, "entry payload is empty");
        e.revision = j["revision"].get<std::uint32_t>();
        if (j.contains("source_samples"))
            e.source_samples = j["source_samples"].get<std::vector<std::string>>();
        e.created_at = j["created_at"].get<std::uint64_t>();
        e.updated_at = j["updated_at"].get<std::uint64_t>();

        if (!first && e.id <= prev_id)
            throw CorruptPoolError(lineno, "ids not strictly increasing");
        prev_id = e.id;
        first = false;

        mut.push(std::move(e));
    }

    std::uint64_t declared_next = header.value("next_id", std::uint64_t(0));
    std::uint64_t min_next = pool.empty() ? 0 : pool.entries().back().id + 1;
    mut.set_counters(std::max(declared_next, min_next), header.value("step", std::uint64_t(0)));
    return pool;
}

bool pools_equal(const ExperiencePool& a, const ExperiencePool& b) {
    if (a.kind() != b.kind() || a.d_text() != b.d_text() || a.d_visual() != b.d_visual() ||
        a.size() != b.size() || a.step() != b.step() || a.next_id() != b.next_id())
        return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto& x = a.entries()[i];
        const auto& y = b.entries()[i];
        auto bits_equal = [](const std::vector<double>& u, const std::vector<double>& v) {
            if (u.size() != v.size()) return false;
            return std::memcmp(u.data(), v.data(), u.size() * sizeof(double)) == 0;
        };
        if (x.id != y.id || x.kind != y.kind || x.payload != y.payload ||
            x.revision != y.revision || x.source_samples != y.source_samples ||
            x.created_at != y.created_at || x.updated_at != y.updated_at)
            return false;
        if (!bits_equal(x.key_text, y.key_text)) return false;
        if (x.key_visual.has_value() != y.key_visual.has_value()) return false;
        if (x.key_visual && !bits_equal(*x.key_visual, *y.key_visual)) return false;
    }
    return true;
}

}  // namespace remod
