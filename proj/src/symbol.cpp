#include "rulejoin/symbol.hpp"

#include <array>
#include <atomic>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <unordered_map>

namespace rulejoin {

namespace {

// Names live in fixed-size chunks that never move, so readers need no lock.
constexpr std::size_t kChunkBits = 12;
constexpr std::size_t kChunkSize = std::size_t{1} << kChunkBits;
constexpr std::size_t kMaxChunks = 4096;

struct Interner {
    std::mutex mu;
    std::unordered_map<std::string, std::uint32_t> ids;
    std::array<std::atomic<std::string*>, kMaxChunks> chunks{};
    std::uint32_t next = 0;

    Interner() { add(""); }

    std::uint32_t add(std::string_view name) {
        std::uint32_t id = next;
        std::size_t c = id >> kChunkBits;
        if (c >= kMaxChunks) throw std::length_error("symbol table exhausted");
        std::string* chunk = chunks[c].load(std::memory_order_acquire);
        if (!chunk) {
            chunk = new std::string[kChunkSize];
            chunks[c].store(chunk, std::memory_order_release);
        }
        chunk[id & (kChunkSize - 1)] = std::string(name);
        ids.emplace(std::string(name), id);
        ++next;
        return id;
    }
};

Interner& interner() {
    static Interner* table = new Interner();
    return *table;
}

} // namespace

Symbol Symbol::intern(std::string_view name) {
    auto& t = interner();
    std::lock_guard lock(t.mu);
    if (auto it = t.ids.find(std::string(name)); it != t.ids.end()) return Symbol(it->second);
    return Symbol(t.add(name));
}

std::string_view Symbol::name() const {
    auto& t = interner();
    std::string* chunk = t.chunks[id_ >> kChunkBits].load(std::memory_order_acquire);
    return chunk[id_ & (kChunkSize - 1)];
}

} // namespace rulejoin
