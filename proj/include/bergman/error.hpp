#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace bergman {

/// Base class for every error raised by the library.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class invalid_measure : public error {
public:
    using error::error;
};

class invalid_weight : public error {
public:
    using error::error;
};

class dimension_mismatch : public error {
public:
    using error::error;
};

class unsupported : public error {
public:
    using error::error;
};

class invalid_configuration : public error {
public:
    using error::error;
};

/// A documented precondition does not hold. `node()` names the offending node when there is one.
class precondition_error : public error {
public:
    explicit precondition_error(const std::string& what, std::optional<Eigen::Index> node = std::nullopt)
        : error(what), node_(node) {}

    [[nodiscard]] std::optional<Eigen::Index> node() const noexcept { return node_; }

private:
    std::optional<Eigen::Index> node_;
};

} // namespace bergman
