#pragma once
#include <stdexcept>
#include <string>

namespace vlab {

// Base for everything the library throws on contract violations.
struct SimError : std::runtime_error {
    explicit SimError(const std::string& msg) : std::runtime_error(msg) {}
};

// Two particles (i, j) closer than the exact kernel can tolerate.
struct CoincidentPairError : SimError {
    int i, j;
    CoincidentPairError(int i_, int j_, double dist)
        : SimError("coincident particle pair (" + std::to_string(i_) + ", " +
                   std::to_string(j_) + "), distance " + std::to_string(dist)),
          i(i_), j(j_) {}
};

// A state blew up: non-finite position/value, with context where.
struct NonFiniteError : SimError {
    explicit NonFiniteError(const std::string& msg) : SimError(msg) {}
};

} // namespace vlab
