#include "cma/state_space.hpp"

#include <bit>
#include <set>
#include <sstream>
#include <stdexcept>

namespace cma {

StateSet StateSet::full(std::uint32_t universe_size) {
    StateSet s(universe_size);
    if (universe_size == 0) return s;
    for (auto& w : s.words_) w = ~0ull;
    // clear bits past the end
    std::uint32_t tail = universe_size & 63;
    if (tail) s.words_.back() &= (1ull << tail) - 1;
    return s;
}

StateSet StateSet::of(std::uint32_t universe_size, const std::vector<std::uint32_t>& members) {
    StateSet s(universe_size);
    for (auto i : members) {
        if (i >= universe_size) throw std::out_of_range("StateSet::of: state index out of range");
        s.set(i);
    }
    return s;
}

StateSet StateSet::singleton(std::uint32_t universe_size, std::uint32_t state) {
    return of(universe_size, {state});
}

std::uint32_t StateSet::count() const {
    std::uint32_t n = 0;
    for (auto w : words_) n += static_cast<std::uint32_t>(std::popcount(w));
    return n;
}

bool StateSet::empty() const {
    for (auto w : words_)
        if (w) return false;
    return true;
}

bool StateSet::intersects(const StateSet& o) const {
    for (std::size_t i = 0; i < words_.size(); ++i)
        if (words_[i] & o.words_[i]) return true;
    return false;
}

bool StateSet::contains(const StateSet& o) const {
    for (std::size_t i = 0; i < words_.size(); ++i)
        if (o.words_[i] & ~words_[i]) return false;
    return true;
}

StateSet& StateSet::operator&=(const StateSet& o) {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= o.words_[i];
    return *this;
}

StateSet& StateSet::operator|=(const StateSet& o) {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
    return *this;
}

StateSet StateSet::complement() const {
    StateSet r = full(size_);
    for (std::size_t i = 0; i < words_.size(); ++i) r.words_[i] &= ~words_[i];
    return r;
}

std::vector<std::uint32_t> StateSet::to_indices() const {
    std::vector<std::uint32_t> out;
    out.reserve(count());
    for_each([&](std::uint32_t i) { out.push_back(i); });
    return out;
}

std::size_t StateSet::hash() const {
    std::size_t h = size_ * 0x9e3779b97f4a7c15ull;
    for (auto w : words_) h = (h ^ w) * 0x100000001b3ull;
    return h;
}

StateSpace::StateSpace(std::vector<Attribute> attributes, std::uint32_t max_states)
    : attrs_(std::move(attributes)) {
    if (attrs_.empty()) throw std::invalid_argument("state space needs at least one attribute");
    std::set<std::string> names;
    std::uint64_t size = 1;
    strides_.resize(attrs_.size());
    for (std::size_t i = 0; i < attrs_.size(); ++i) {
        const Attribute& a = attrs_[i];
        if (!names.insert(a.name).second)
            throw std::invalid_argument("duplicate attribute name: " + a.name);
        if (a.domain.empty())
            throw std::invalid_argument("attribute " + a.name + " has empty domain");
        for (std::size_t j = 1; j < a.domain.size(); ++j)
            if (a.domain[j] <= a.domain[j - 1])
                throw std::invalid_argument("attribute " + a.name +
                                            " domain must be strictly increasing");
        strides_[i] = static_cast<std::uint32_t>(size);
        size *= a.domain.size();
        if (size > max_states)
            throw std::invalid_argument("state space exceeds cap of " +
                                        std::to_string(max_states) + " states");
    }
    size_ = static_cast<std::uint32_t>(size);
}

int StateSpace::attribute_index(std::string_view name) const {
    for (std::size_t i = 0; i < attrs_.size(); ++i)
        if (attrs_[i].name == name) return static_cast<int>(i);
    return -1;
}

std::uint32_t StateSpace::index_of(const std::vector<int>& values) const {
    if (values.size() != attrs_.size())
        throw std::invalid_argument("value vector arity mismatch");
    std::uint32_t idx = 0;
    for (std::size_t i = 0; i < attrs_.size(); ++i) {
        const auto& dom = attrs_[i].domain;
        std::size_t pos = 0;
        for (; pos < dom.size(); ++pos)
            if (dom[pos] == values[i]) break;
        if (pos == dom.size())
            throw std::out_of_range("value " + std::to_string(values[i]) +
                                    " not in domain of " + attrs_[i].name);
        idx += static_cast<std::uint32_t>(pos) * strides_[i];
    }
    return idx;
}

std::vector<int> StateSpace::decode(std::uint32_t index) const {
    if (index >= size_) throw std::out_of_range("state index out of range");
    std::vector<int> values(attrs_.size());
    for (std::size_t i = 0; i < attrs_.size(); ++i)
        values[i] = attrs_[i].domain[digit_at(index, i)];
    return values;
}

int StateSpace::value_at(std::uint32_t state, std::size_t attr) const {
    return attrs_[attr].domain[digit_at(state, attr)];
}

std::uint32_t StateSpace::digit_at(std::uint32_t state, std::size_t attr) const {
    return (state / strides_[attr]) % static_cast<std::uint32_t>(attrs_[attr].domain.size());
}

std::string StateSpace::describe_state(std::uint32_t state) const {
    std::ostringstream os;
    for (std::size_t i = 0; i < attrs_.size(); ++i) {
        if (i) os << ",";
        os << attrs_[i].name << "=" << value_at(state, i);
    }
    return os.str();
}

std::string StateSpace::describe_set(const StateSet& set, std::size_t max_listed) const {
    if (set.count() == size_) return "Omega";
    if (set.empty()) return "{}";
    if (set.count() <= max_listed) {
        std::ostringstream os;
        os << "{";
        bool first = true;
        set.for_each([&](std::uint32_t s) {
            if (!first) os << " | ";
            first = false;
            os << describe_state(s);
        });
        os << "}";
        return os.str();
    }
    return "|B|=" + std::to_string(set.count());
}

bool operator==(const StateSpace& a, const StateSpace& b) {
    if (a.attrs_.size() != b.attrs_.size()) return false;
    for (std::size_t i = 0; i < a.attrs_.size(); ++i)
        if (a.attrs_[i].name != b.attrs_[i].name || a.attrs_[i].domain != b.attrs_[i].domain)
            return false;
    return true;
}

} // namespace cma
