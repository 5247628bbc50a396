#pragma once

// Open-addressing set of fixed-width integer vectors stored contiguously.
// Keeps millions of cells without a heap allocation per vector.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace tileforge::detail {

class CellSet {
public:
    explicit CellSet(std::size_t dim, std::size_t expected = 16) : dim_(dim)
    {
        std::size_t cap = 16;
        while (cap < expected * 2)
            cap <<= 1;
        slots_.assign(cap, kEmpty);
    }

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return data_.size() / (dim_ == 0 ? 1 : dim_); }
    const std::vector<std::int64_t>& data() const noexcept { return data_; }
    std::vector<std::int64_t>& data() noexcept { return data_; }

    std::span<const std::int64_t> at(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }

    /// Returns {index, inserted}.
    std::pair<std::size_t, bool> insert(std::span<const std::int64_t> v)
    {
        if ((size() + 1) * 2 > slots_.size())
            grow();
        std::size_t mask = slots_.size() - 1;
        std::size_t h = hash(v) & mask;
        while (slots_[h] != kEmpty) {
            if (equal(slots_[h], v))
                return {slots_[h], false};
            h = (h + 1) & mask;
        }
        std::size_t idx = size();
        data_.insert(data_.end(), v.begin(), v.end());
        slots_[h] = idx;
        return {idx, true};
    }

    bool contains(std::span<const std::int64_t> v) const { return find(v) != kEmpty; }

    std::size_t find(std::span<const std::int64_t> v) const
    {
        std::size_t mask = slots_.size() - 1;
        std::size_t h = hash(v) & mask;
        while (slots_[h] != kEmpty) {
            if (equal(slots_[h], v))
                return slots_[h];
            h = (h + 1) & mask;
        }
        return kEmpty;
    }

    static constexpr std::size_t kEmpty = static_cast<std::size_t>(-1);

private:
    static std::size_t hash(std::span<const std::int64_t> v)
    {
        std::uint64_t h = 0x9e3779b97f4a7c15ull;
        for (std::int64_t x : v) {
            h ^= static_cast<std::uint64_t>(x);
            h *= 0xbf58476d1ce4e5b9ull;
            h ^= h >> 31;
        }
        return static_cast<std::size_t>(h);
    }

    bool equal(std::size_t idx, std::span<const std::int64_t> v) const
    {
        const std::int64_t* p = data_.data() + idx * dim_;
        for (std::size_t i = 0; i < dim_; ++i)
            if (p[i] != v[i])
                return false;
        return true;
    }

    void grow()
    {
        std::vector<std::size_t> old(slots_.size() * 2, kEmpty);
        old.swap(slots_);
        std::size_t mask = slots_.size() - 1;
        for (std::size_t idx = 0; idx < size(); ++idx) {
            std::size_t h = hash(at(idx)) & mask;
            while (slots_[h] != kEmpty)
                h = (h + 1) & mask;
            slots_[h] = idx;
        }
    }

    std::size_t dim_;
    std::vector<std::int64_t> data_;
    std::vector<std::size_t> slots_;
};

} // namespace tileforge::detail
