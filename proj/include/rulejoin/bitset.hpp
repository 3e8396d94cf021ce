#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace rulejoin {

// Fixed-width bitset over example indices.
class Bitset {
public:
    Bitset() = default;
    explicit Bitset(std::size_t n, bool value = false) : size_(n), words_((n + 63) / 64, value ? ~std::uint64_t{0} : 0) {
        trim();
    }

    std::size_t size() const { return size_; }

    bool test(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1U; }
    void set(std::size_t i, bool v = true) {
        if (v) words_[i / 64] |= std::uint64_t{1} << (i % 64);
        else words_[i / 64] &= ~(std::uint64_t{1} << (i % 64));
    }

    std::size_t count() const {
        std::size_t c = 0;
        for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
        return c;
    }
    bool any() const {
        for (auto w : words_)
            if (w) return true;
        return false;
    }
    bool none() const { return !any(); }
    bool all() const { return count() == size_; }

    // True iff every bit set here is also set in other.
    bool is_subset_of(const Bitset& other) const {
        for (std::size_t i = 0; i < words_.size(); ++i)
            if (words_[i] & ~other.words_[i]) return false;
        return true;
    }

    Bitset& operator&=(const Bitset& o) {
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= o.words_[i];
        return *this;
    }
    Bitset& operator|=(const Bitset& o) {
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
        return *this;
    }
    Bitset operator~() const {
        Bitset r = *this;
        for (auto& w : r.words_) w = ~w;
        r.trim();
        return r;
    }
    friend Bitset operator&(Bitset a, const Bitset& b) { return a &= b; }
    friend Bitset operator|(Bitset a, const Bitset& b) { return a |= b; }
    friend bool operator==(const Bitset&, const Bitset&) = default;
    friend auto operator<=>(const Bitset& a, const Bitset& b) {
        if (a.size_ != b.size_) return a.size_ <=> b.size_;
        return a.words_ <=> b.words_;
    }

    template <class F>
    void for_each(F&& f) const {
        for (std::size_t w = 0; w < words_.size(); ++w)
            for (std::uint64_t m = words_[w]; m; m &= m - 1)
                f(w * 64 + static_cast<std::size_t>(std::countr_zero(m)));
    }

    std::vector<std::size_t> indices() const {
        std::vector<std::size_t> out;
        for_each([&](std::size_t i) { out.push_back(i); });
        return out;
    }

    std::size_t hash() const {
        std::size_t h = size_;
        for (auto w : words_) h = h * 0x100000001b3ULL ^ w;
        return h;
    }

private:
    void trim() {
        if (size_ % 64 && !words_.empty()) words_.back() &= (std::uint64_t{1} << (size_ % 64)) - 1;
    }

    std::size_t size_ = 0;
    std::vector<std::uint64_t> words_;
};

} // namespace rulejoin
