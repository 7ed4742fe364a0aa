#pragma once

#include "cma/state_space.hpp"
#include "cma/validation.hpp"

#include <cstdint>
#include <vector>

namespace cma {

/// Total mapping from each state to a nonempty set of successor states,
/// stored extensionally (sorted unique index lists per state).
class Effect {
public:
    Effect() = default;
    explicit Effect(std::uint32_t space_size)
        : space_size_(space_size), image_(space_size) {}

    static Effect identity(std::uint32_t space_size);
    static Effect from_table(std::uint32_t space_size,
                             std::vector<std::vector<std::uint32_t>> image);

    std::uint32_t space_size() const { return space_size_; }
    const std::vector<std::uint32_t>& image(std::uint32_t state) const {
        return image_[state];
    }
    StateSet image_of(std::uint32_t state) const;
    /// Lifted form: union of per-state images over B.
    StateSet image_of(const StateSet& B) const;

    bool total() const;

    /// then(first(b)) for every b.
    static Effect compose(const Effect& first, const Effect& then);
    /// Pointwise union of images.
    static Effect union_of(const Effect& a, const Effect& b);

    friend bool operator==(const Effect& a, const Effect& b) {
        return a.space_size_ == b.space_size_ && a.image_ == b.image_;
    }

private:
    std::uint32_t space_size_ = 0;
    std::vector<std::vector<std::uint32_t>> image_;
};

/// One symbolic effect rule: either an additive offset interval
/// (attr += [lo,hi]) or a set-to interval (attr := [lo,hi]).
struct EffectRule {
    std::string attr;
    bool additive = true;
    int lo = 0;
    int hi = 0;
};

/// Compile rules into an extensional effect. Per state, every combination of
/// per-rule choices is applied independently; values outside the attribute
/// domain saturate at the boundary (and snap to the nearest domain value for
/// gapped domains, ties toward the lower value). Attributes without rules are
/// unchanged. Saturation emits a warning into `report` when provided.
Effect compile_effect(const std::vector<EffectRule>& rules, const StateSpace& space,
                      ValidationReport* report = nullptr);

} // namespace cma
