#pragma once

#include <stdexcept>
#include <string>

namespace vipguard {

struct ConfigError : std::runtime_error {
    std::string field;
    ConfigError(std::string field_, const std::string& reason)
        : std::runtime_error("config field '" + field_ + "': " + reason),
          field(std::move(field_)) {}
};

struct ShapeMismatch : std::runtime_error {
    explicit ShapeMismatch(const std::string& what) : std::runtime_error("shape mismatch: " + what) {}
};

struct IndexOutOfRange : std::runtime_error {
    explicit IndexOutOfRange(const std::string& what) : std::runtime_error("index out of range: " + what) {}
};

struct ActionCountMismatch : std::runtime_error {
    ActionCountMismatch(std::size_t got, std::size_t want)
        : std::runtime_error("expected " + std::to_string(want) + " actions, got " + std::to_string(got)) {}
};

struct NonFiniteAction : std::runtime_error {
    explicit NonFiniteAction(const std::string& what) : std::runtime_error("non-finite action: " + what) {}
};

struct NonFiniteGradient : std::runtime_error {
    explicit NonFiniteGradient(const std::string& what) : std::runtime_error("non-finite gradient: " + what) {}
};

struct NonFiniteLoss : std::runtime_error {
    explicit NonFiniteLoss(const std::string& what) : std::runtime_error("non-finite loss: " + what) {}
};

struct SpawnFailure : std::runtime_error {
    explicit SpawnFailure(const std::string& what) : std::runtime_error("spawn failure: " + what) {}
};

struct EmptyTrajectory : std::runtime_error {
    EmptyTrajectory() : std::runtime_error("empty trajectory") {}
};

struct InsufficientData : std::runtime_error {
    explicit InsufficientData(const std::string& what) : std::runtime_error("insufficient data: " + what) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error("io error: " + what) {}
};

}  // namespace vipguard
