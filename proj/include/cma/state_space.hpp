#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cma {

/// Dense bit-vector subset of a finite state space. Carries the universe size
/// so complements and cross-set operations can be checked.
class StateSet {
public:
    StateSet() = default;
    explicit StateSet(std::uint32_t universe_size)
        : size_(universe_size), words_((universe_size + 63) / 64, 0) {}

    static StateSet full(std::uint32_t universe_size);
    static StateSet of(std::uint32_t universe_size, const std::vector<std::uint32_t>& members);
    static StateSet singleton(std::uint32_t universe_size, std::uint32_t state);

    std::uint32_t universe_size() const { return size_; }
    bool test(std::uint32_t i) const { return (words_[i >> 6] >> (i & 63)) & 1; }
    void set(std::uint32_t i) { words_[i >> 6] |= 1ull << (i & 63); }
    void reset(std::uint32_t i) { words_[i >> 6] &= ~(1ull << (i & 63)); }

    std::uint32_t count() const;
    bool empty() const;
    bool intersects(const StateSet& o) const;
    /// true iff this is a superset of o.
    bool contains(const StateSet& o) const;
    bool is_subset_of(const StateSet& o) const { return o.contains(*this); }

    StateSet& operator&=(const StateSet& o);
    StateSet& operator|=(const StateSet& o);
    StateSet complement() const;

    friend StateSet operator&(StateSet a, const StateSet& b) { return a &= b; }
    friend StateSet operator|(StateSet a, const StateSet& b) { return a |= b; }
    friend bool operator==(const StateSet& a, const StateSet& b) {
        return a.size_ == b.size_ && a.words_ == b.words_;
    }
    /// Lexicographic on the packed words; used only to get deterministic map order.
    friend bool operator<(const StateSet& a, const StateSet& b) {
        if (a.size_ != b.size_) return a.size_ < b.size_;
        return a.words_ < b.words_;
    }

    std::vector<std::uint32_t> to_indices() const;
    template <class F>
    void for_each(F&& f) const {
        for (std::size_t w = 0; w < words_.size(); ++w) {
            std::uint64_t bits = words_[w];
            while (bits) {
                std::uint32_t i = static_cast<std::uint32_t>(w * 64 + __builtin_ctzll(bits));
                f(i);
                bits &= bits - 1;
            }
        }
    }
    std::size_t hash() const;

private:
    std::uint32_t size_ = 0;
    std::vector<std::uint64_t> words_;
};

struct Attribute {
    std::string name;
    std::vector<int> domain; // nonempty, strictly increasing
};

/// Finite state space built from attribute declarations. State indices are a
/// mixed-radix encoding of attribute-value vectors; the first attribute is
/// the least significant digit, so the all-minima vector is index 0.
class StateSpace {
public:
    static constexpr std::uint32_t kDefaultMaxStates = 1u << 20;

    StateSpace() = default;
    explicit StateSpace(std::vector<Attribute> attributes,
                        std::uint32_t max_states = kDefaultMaxStates);

    std::uint32_t size() const { return size_; }
    const std::vector<Attribute>& attributes() const { return attrs_; }
    /// -1 when the name is unknown.
    int attribute_index(std::string_view name) const;

    std::uint32_t index_of(const std::vector<int>& values) const;
    std::vector<int> decode(std::uint32_t index) const;
    /// Value of one attribute without materializing the full vector.
    int value_at(std::uint32_t state, std::size_t attr) const;
    /// Domain position (not value) of one attribute.
    std::uint32_t digit_at(std::uint32_t state, std::size_t attr) const;

    StateSet full_set() const { return StateSet::full(size_); }
    StateSet empty_set() const { return StateSet(size_); }

    std::string describe_state(std::uint32_t state) const;
    /// Compact leaf label for DOT export.
    std::string describe_set(const StateSet& set, std::size_t max_listed = 6) const;

    friend bool operator==(const StateSpace& a, const StateSpace& b);

private:
    std::vector<Attribute> attrs_;
    std::vector<std::uint32_t> strides_;
    std::uint32_t size_ = 0;
};

} // namespace cma
