#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace remod {

enum class Errc {
    empty_text,
    unknown_label,
    duplicate_id,
    dimension_mismatch,
    zero_norm_vector,
    alpha_out_of_range,
    empty_payload,
    backend_error,
    parse_error,
    network_error,
    timeout,
    transport_error,
    remote_error,
    mock_miss,
    image_decode_error,
    io_error,
    corrupt_pool_file,
    dimension_inconsistency,
    length_mismatch,
    precondition,
    config_error,
};

const char* errc_name(Errc code);

/// Base exception for all library failures. Carries a machine-checkable code
/// next to the human-readable message.
class Error : public std::runtime_error {
public:
    Error(Errc code, std::string message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

/// Raised by record validation; lists every offending field.
class ValidationError : public Error {
public:
    ValidationError(Errc code, std::string message,
                    std::vector<std::pair<std::string, std::string>> fields)
        : Error(code, std::move(message)), fields_(std::move(fields)) {}

    const std::vector<std::pair<std::string, std::string>>& fields() const noexcept {
        return fields_;
    }

private:
    std::vector<std::pair<std::string, std::string>> fields_;
};

/// Pool-file load failure, pinned to the line that broke.
class CorruptPoolError : public Error {
public:
    CorruptPoolError(std::size_t line, std::string reason)
        : Error(Errc::corrupt_pool_file,
                "line " + std::to_string(line) + ": " + reason),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// A batch fusion failed part-way through. Entries listed in updated_ids kept
/// their new payloads; the rest were not touched.
class PartialEvolutionError : public Error {
public:
    PartialEvolutionError(std::string message, std::vector<std::uint64_t> updated_ids)
        : Error(Errc::backend_error, std::move(message)), updated_ids_(std::move(updated_ids)) {}

    const std::vector<std::uint64_t>& updated_ids() const noexcept { return updated_ids_; }

private:
    std::vector<std::uint64_t> updated_ids_;
};

}  // namespace remod
