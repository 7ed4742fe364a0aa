#include "cma/effect.hpp"

#include <algorithm>
#include <cstdlib>
#include <stdexcept>

namespace cma {

Effect Effect::identity(std::uint32_t space_size) {
    Effect e(space_size);
    for (std::uint32_t s = 0; s < space_size; ++s) e.image_[s] = {s};
    return e;
}

Effect Effect::from_table(std::uint32_t space_size,
                          std::vector<std::vector<std::uint32_t>> image) {
    if (image.size() != space_size)
        throw std::invalid_argument("effect table must cover every state");
    Effect e(space_size);
    for (std::uint32_t s = 0; s < space_size; ++s) {
        auto& row = image[s];
        std::sort(row.begin(), row.end());
        row.erase(std::unique(row.begin(), row.end()), row.end());
        if (row.empty())
            throw std::invalid_argument("effect image of state " + std::to_string(s) +
                                        " is empty");
        if (row.back() >= space_size)
            throw std::invalid_argument("effect image of state " + std::to_string(s) +
                                        " is out of range");
        e.image_[s] = std::move(row);
    }
    return e;
}

StateSet Effect::image_of(std::uint32_t state) const {
    StateSet out(space_size_);
    for (auto t : image_[state]) out.set(t);
    return out;
}

StateSet Effect::image_of(const StateSet& B) const {
    StateSet out(space_size_);
    B.for_each([&](std::uint32_t b) {
        for (auto t : image_[b]) out.set(t);
    });
    return out;
}

bool Effect::total() const {
    for (const auto& row : image_)
        if (row.empty()) return false;
    return true;
}

Effect Effect::compose(const Effect& first, const Effect& then) {
    if (first.space_size_ != then.space_size_)
        throw std::invalid_argument("effect composition: space mismatch");
    Effect e(first.space_size_);
    for (std::uint32_t s = 0; s < first.space_size_; ++s) {
        std::vector<std::uint32_t> out;
        for (auto mid : first.image_[s])
            out.insert(out.end(), then.image_[mid].begin(), then.image_[mid].end());
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        e.image_[s] = std::move(out);
    }
    return e;
}

Effect Effect::union_of(const Effect& a, const Effect& b) {
    if (a.space_size_ != b.space_size_)
        throw std::invalid_argument("effect union: space mismatch");
    Effect e(a.space_size_);
    for (std::uint32_t s = 0; s < a.space_size_; ++s) {
        std::vector<std::uint32_t> out = a.image_[s];
        out.insert(out.end(), b.image_[s].begin(), b.image_[s].end());
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        e.image_[s] = std::move(out);
    }
    return e;
}

namespace {

// Nearest domain value after clamping to [front, back]; ties go low.
int snap_to_domain(const std::vector<int>& dom, long long v, bool* saturated) {
    if (v <= dom.front()) {
        *saturated |= v < dom.front();
        return dom.front();
    }
    if (v >= dom.back()) {
        *saturated |= v > dom.back();
        return dom.back();
    }
    auto it = std::lower_bound(dom.begin(), dom.end(), static_cast<int>(v));
    if (*it == v) return *it;
    int above = *it;
    int below = *(it - 1);
    *saturated = true; // value fell in a domain gap
    return (above - v < v - below) ? above : below;
}

} // namespace

Effect compile_effect(const std::vector<EffectRule>& rules, const StateSpace& space,
                      ValidationReport* report) {
    std::vector<int> rule_attr(rules.size());
    for (std::size_t r = 0; r < rules.size(); ++r) {
        int idx = space.attribute_index(rules[r].attr);
        if (idx < 0)
            throw std::invalid_argument("effect rule references unknown attribute: " +
                                        rules[r].attr);
        if (rules[r].lo > rules[r].hi)
            throw std::invalid_argument("effect rule interval is inverted for " + rules[r].attr);
        rule_attr[r] = idx;
    }

    Effect e(space.size());
    bool saturated = false;
    std::vector<std::vector<std::uint32_t>> table(space.size());
    std::vector<int> values;
    for (std::uint32_t s = 0; s < space.size(); ++s) {
        // seed with the unchanged state, then apply each rule's choices
        values = space.decode(s);
        std::vector<std::vector<int>> choice_values{values};
        for (std::size_t r = 0; r < rules.size(); ++r) {
            std::vector<std::vector<int>> next;
            const auto& dom = space.attributes()[static_cast<std::size_t>(rule_attr[r])].domain;
            for (const auto& base : choice_values) {
                for (int c = rules[r].lo; c <= rules[r].hi; ++c) {
                    std::vector<int> v = base;
                    long long target = rules[r].additive
                                           ? static_cast<long long>(v[rule_attr[r]]) + c
                                           : c;
                    v[rule_attr[r]] = snap_to_domain(dom, target, &saturated);
                    next.push_back(std::move(v));
                }
            }
            choice_values = std::move(next);
        }
        std::vector<std::uint32_t> row;
        row.reserve(choice_values.size());
        for (const auto& v : choice_values) row.push_back(space.index_of(v));
        std::sort(row.begin(), row.end());
        row.erase(std::unique(row.begin(), row.end()), row.end());
        table[s] = std::move(row);
    }
    if (saturated && report)
        report->warn("effect-saturation", "",
                     "effect rule results were saturated/snapped to domain boundaries");
    return Effect::from_table(space.size(), std::move(table));
}

} // namespace cma
