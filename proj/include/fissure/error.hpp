#pragma once

#include <stdexcept>
#include <string>

namespace fissure {

enum class ErrorCode {
    invalid_argument,
    parse,
    io,
    overlap,
    vertical_tangent,
    disconnected_block,
    outside_domain,
    target_too_coarse,
    mesh_quality,
    coefficient,
    limit_data,
    singular,
    tolerance,
    too_large,
    evaluation,
    unknown_case,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// Parse failures carry either a byte offset (expressions) or a line/field (config files).
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t offset, std::size_t line = 0, std::string field = {})
        : Error(ErrorCode::parse, what), offset_(offset), line_(line), field_(std::move(field)) {}
    std::size_t offset() const noexcept { return offset_; }
    std::size_t line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }

private:
    std::size_t offset_;
    std::size_t line_;
    std::string field_;
};

const char* error_code_name(ErrorCode code);

}  // namespace fissure
