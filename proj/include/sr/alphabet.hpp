#pragma once

#include <string>

#include "sr/errors.hpp"

namespace sr {

// Finite alphabet {0, 1, ..., size-1}. The label names the random variable
// it belongs to ("X", "W1", ...) and is how axes are matched in compositions.
struct Alphabet {
    int size = 0;
    std::string label;

    Alphabet() = default;
    Alphabet(int size_, std::string label_) : size(size_), label(std::move(label_)) {
        if (size < 1) throw InputError("alphabet '" + label + "' must have size >= 1");
    }

    bool operator==(const Alphabet& o) const { return size == o.size && label == o.label; }
};

} // namespace sr
