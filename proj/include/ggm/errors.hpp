#pragma once

#include <stdexcept>
#include <string>

namespace ggm {

// Failure kinds used across the library. Everything derives from
// std::runtime_error so callers who don't care can catch one type.

struct NotPositiveDefinite : std::runtime_error {
    explicit NotPositiveDefinite(const std::string& what)
        : std::runtime_error(what) {}
};

struct NotConverged : std::runtime_error {
    explicit NotConverged(const std::string& what) : std::runtime_error(what) {}
};

struct InvalidParameter : std::invalid_argument {
    explicit InvalidParameter(const std::string& what)
        : std::invalid_argument(what) {}
};

struct DimensionMismatch : std::invalid_argument {
    explicit DimensionMismatch(const std::string& what)
        : std::invalid_argument(what) {}
};

struct NonPositiveDiagonal : std::runtime_error {
    explicit NonPositiveDiagonal(const std::string& what)
        : std::runtime_error(what) {}
};

struct SingularGammaSS : std::runtime_error {
    explicit SingularGammaSS(const std::string& what)
        : std::runtime_error(what) {}
};

struct IncoherenceFails : std::runtime_error {
    explicit IncoherenceFails(const std::string& what)
        : std::runtime_error(what) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ggm
