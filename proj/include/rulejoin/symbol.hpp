#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

namespace rulejoin {

// Interned identifier. Equality and hashing use the id; ordering uses the
// name so that canonical forms do not depend on interning order.
class Symbol {
public:
    Symbol() = default;

    static Symbol intern(std::string_view name);

    std::uint32_t id() const { return id_; }
    std::string_view name() const;

    friend bool operator==(Symbol a, Symbol b) { return a.id_ == b.id_; }
    friend std::strong_ordering operator<=>(Symbol a, Symbol b) {
        if (a.id_ == b.id_) return std::strong_ordering::equal;
        auto c = a.name().compare(b.name());
        return c < 0 ? std::strong_ordering::less : std::strong_ordering::greater;
    }

    static Symbol from_id(std::uint32_t id) { return Symbol(id); }

private:
    explicit Symbol(std::uint32_t id) : id_(id) {}
    std::uint32_t id_ = 0;
};

} // namespace rulejoin

template <>
struct std::hash<rulejoin::Symbol> {
    std::size_t operator()(rulejoin::Symbol s) const noexcept { return std::hash<std::uint32_t>{}(s.id()); }
};
