#pragma once

#include <algorithm>
#include <compare>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "pka/error.hpp"
#include "pka/numeric.hpp"

namespace pka {

/// A string over the alphabet, stored as a sequence of letter indices.
using Word = std::string;

/// Shortlex: shorter words first, then lexicographic by letter index.
inline bool shortlex_less(const Word& a, const Word& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b; // char_traits<char>::compare is an unsigned byte compare
}

/**
 * Canonical representative of a depth-n multiset class: only words of
 * length <= depth, only nonzero multiplicities, keys in shortlex order.
 * Two values at the same depth are equal iff the multisets agree on every
 * word of length <= depth.
 */
class TruncMultiset {
public:
    using Entry = std::pair<Word, Natural>;

    TruncMultiset() = default;
    explicit TruncMultiset(int depth) : depth_(depth) {}

    /// Builds from arbitrary entries: drops long words and zeros, merges duplicates.
    TruncMultiset(int depth, std::vector<Entry> entries) : depth_(depth) {
        std::erase_if(entries, [&](const Entry& e) {
            return e.second.is_zero() || static_cast<int>(e.first.size()) > depth;
        });
        std::sort(entries.begin(), entries.end(),
                  [](const Entry& a, const Entry& b) { return shortlex_less(a.first, b.first); });
        for (auto& e : entries) {
            if (!entries_.empty() && entries_.back().first == e.first)
                entries_.back().second += e.second;
            else
                entries_.push_back(std::move(e));
        }
    }

    TruncMultiset(int depth, std::initializer_list<Entry> entries)
        : TruncMultiset(depth, std::vector<Entry>(entries)) {}

    int depth() const noexcept { return depth_; }
    bool empty() const noexcept { return entries_.empty(); }
    const std::vector<Entry>& entries() const noexcept { return entries_; }

    Natural count(const Word& w) const {
        auto it = std::lower_bound(entries_.begin(), entries_.end(), w,
                                   [](const Entry& e, const Word& k) { return shortlex_less(e.first, k); });
        if (it != entries_.end() && it->first == w) return it->second;
        return Natural{};
    }

    /// Total number of elements counted with multiplicity.
    Natural size() const {
        Natural total;
        for (const auto& e : entries_) total += e.second;
        return total;
    }

    /// Canonical element of the coarser class: forget words longer than m.
    TruncMultiset restrict(int m) const {
        TruncMultiset out(std::max(m, 0));
        if (m < 0) return out;
        for (const auto& e : entries_) {
            if (static_cast<int>(e.first.size()) > m) break; // shortlex: lengths ascend
            out.entries_.push_back(e);
        }
        return out;
    }

    /// x . alpha truncated to `depth`: every key gets the prefix, overlong keys vanish.
    TruncMultiset prefixed(const Word& prefix, int depth) const {
        TruncMultiset out(depth);
        for (const auto& e : entries_) {
            if (static_cast<int>(prefix.size() + e.first.size()) > depth) break;
            out.entries_.emplace_back(prefix + e.first, e.second);
        }
        return out; // prefixing preserves shortlex order among equal-length keys
    }

    /// Pointwise sum. Both operands must have the same depth.
    friend TruncMultiset madd(const TruncMultiset& a, const TruncMultiset& b) {
        if (a.depth_ != b.depth_)
            throw Error(ErrorKind::DepthMismatch, "madd: depths " + std::to_string(a.depth_) + " and " +
                                                      std::to_string(b.depth_));
        if (a.empty()) return b;
        if (b.empty()) return a;
        TruncMultiset out(a.depth_);
        out.entries_.reserve(a.entries_.size() + b.entries_.size());
        auto i = a.entries_.begin(), j = b.entries_.begin();
        while (i != a.entries_.end() || j != b.entries_.end()) {
            if (j == b.entries_.end() || (i != a.entries_.end() && shortlex_less(i->first, j->first))) {
                out.entries_.push_back(*i++);
            } else if (i == a.entries_.end() || shortlex_less(j->first, i->first)) {
                out.entries_.push_back(*j++);
            } else {
                out.entries_.emplace_back(i->first, i->second + j->second);
                ++i;
                ++j;
            }
        }
        return out;
    }

    /// k-fold sum alpha + ... + alpha.
    TruncMultiset scaled(const Natural& k) const {
        TruncMultiset out(depth_);
        if (k.is_zero()) return out;
        out.entries_ = entries_;
        for (auto& e : out.entries_) e.second = e.second * k;
        return out;
    }

    friend bool operator==(const TruncMultiset& a, const TruncMultiset& b) {
        return a.depth_ == b.depth_ && a.entries_ == b.entries_;
    }

    /// Canonical total order used to sort distribution supports.
    friend bool operator<(const TruncMultiset& a, const TruncMultiset& b) {
        if (a.depth_ != b.depth_) return a.depth_ < b.depth_;
        auto n = std::min(a.entries_.size(), b.entries_.size());
        for (std::size_t i = 0; i < n; ++i) {
            const auto& x = a.entries_[i];
            const auto& y = b.entries_[i];
            if (x.first != y.first) return shortlex_less(x.first, y.first);
            if (x.second != y.second) return x.second < y.second;
        }
        return a.entries_.size() < b.entries_.size();
    }

private:
    int depth_ = 0;
    std::vector<Entry> entries_;
};

} // namespace pka
