#pragma once

#include <stdexcept>
#include <string>

namespace lod2 {

struct InvalidInputError : std::runtime_error {
    explicit InvalidInputError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DegenerateGeometryError : std::runtime_error {
    explicit DegenerateGeometryError(const std::string& msg) : std::runtime_error(msg) {}
};

struct StageError : std::runtime_error {
    std::string stage;
    StageError(std::string stage_, const std::string& msg)
        : std::runtime_error("[" + stage_ + "] " + msg), stage(std::move(stage_)) {}
};

}  // namespace lod2
