#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace stablecoin {

/// Base of every error raised by the library. `code()` is a stable
/// machine-readable identifier used by the CLI's JSON error output.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(what), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

#define STABLECOIN_DEFINE_ERROR(Name)                                      \
    class Name : public Error {                                            \
    public:                                                                \
        explicit Name(const std::string& what) : Error(#Name, what) {}     \
    }

STABLECOIN_DEFINE_ERROR(InvalidArgument);
STABLECOIN_DEFINE_ERROR(InvalidQ);
STABLECOIN_DEFINE_ERROR(MonotonicityViolation);
STABLECOIN_DEFINE_ERROR(SupplyConsistencyViolation);
STABLECOIN_DEFINE_ERROR(AssumptionViolated);
STABLECOIN_DEFINE_ERROR(NonConvergence);
STABLECOIN_DEFINE_ERROR(EmptySeries);
STABLECOIN_DEFINE_ERROR(DegenerateVariance);
STABLECOIN_DEFINE_ERROR(InsufficientOverlap);
STABLECOIN_DEFINE_ERROR(SingularDesign);
STABLECOIN_DEFINE_ERROR(NonPositivePrice);

#undef STABLECOIN_DEFINE_ERROR

/// Raised by the threshold solvers when the defining function never crosses
/// its target on the fundamental interval.
class NoRoot : public Error {
public:
    enum class Side { Low, High };

    NoRoot(Side side, const std::string& what) : Error("NoRoot", what), side_(side) {}

    /// Low: the function stays below the target everywhere.
    /// High: it stays above the target everywhere.
    Side side() const noexcept { return side_; }

private:
    Side side_;
};

class ParseError : public Error {
public:
    ParseError(std::string file, int line, std::string field, const std::string& message)
        : Error("ParseError", format(file, line, field, message)),
          file_(std::move(file)), line_(line), field_(std::move(field)) {}

    const std::string& file() const noexcept { return file_; }
    int line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }

private:
    static std::string format(const std::string& file, int line, const std::string& field,
                              const std::string& message) {
        std::string out = file;
        if (line > 0) out += ":" + std::to_string(line);
        if (!field.empty()) out += ": " + field;
        return out + ": " + message;
    }

    std::string file_;
    int line_;
    std::string field_;
};

/// Aggregates every problem found while validating a configuration.
class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<std::string> problems)
        : Error("ValidationError", join(problems)), problems_(std::move(problems)) {}

    const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
    static std::string join(const std::vector<std::string>& items) {
        std::string out;
        for (const auto& item : items) {
            if (!out.empty()) out += "; ";
            out += item;
        }
        return out;
    }

    std::vector<std::string> problems_;
};

}  // namespace stablecoin
