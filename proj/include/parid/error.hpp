#pragma once

#include <stdexcept>
#include <string>

namespace parid {

/// Invalid model or experiment configuration (bad parameters, violated
/// delta + min-support constraint, malformed spec strings).
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// Operation called outside the parameter regime it supports, e.g. a limiting
/// degree distribution for an infinite-mean weight law.
class UnsupportedRegime : public std::domain_error {
public:
    explicit UnsupportedRegime(const std::string& what) : std::domain_error(what) {}
};

/// Caller-side precondition violation on an analysis input.
class PreconditionError : public std::domain_error {
public:
    explicit PreconditionError(const std::string& what) : std::domain_error(what) {}
};

}  // namespace parid
