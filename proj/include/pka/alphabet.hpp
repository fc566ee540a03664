#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pka/error.hpp"

namespace pka {

/// Index of a letter within its alphabet.
using Letter = std::uint8_t;

/// Finite ordered set of action symbols. Letter order fixes the shortlex
/// order used for canonical multisets.
class Alphabet {
public:
    Alphabet() = default;

    explicit Alphabet(std::vector<std::string> letters) : letters_(std::move(letters)) {
        if (letters_.size() > 255) throw Error(ErrorKind::InvalidArgument, "alphabet too large");
        for (std::size_t i = 0; i < letters_.size(); ++i) {
            if (letters_[i].empty()) throw Error(ErrorKind::InvalidArgument, "empty letter name");
            if (!index_.emplace(letters_[i], static_cast<Letter>(i)).second)
                throw Error(ErrorKind::InvalidArgument, "duplicate letter '" + letters_[i] + "'");
        }
    }

    std::size_t size() const noexcept { return letters_.size(); }
    bool empty() const noexcept { return letters_.empty(); }
    const std::vector<std::string>& letters() const noexcept { return letters_; }
    const std::string& name(Letter l) const { return letters_.at(l); }

    bool contains(const std::string& name) const { return index_.count(name) != 0; }

    std::optional<Letter> find(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    Letter index(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) throw Error(ErrorKind::UnknownIdentifier, "letter '" + name + "' is not in the alphabet");
        return it->second;
    }

    /// Renders a word (a string of letter indices). Letters are concatenated
    /// when every name is a single character, otherwise joined with '.'.
    std::string render(const std::string& word) const {
        bool single = true;
        for (const auto& l : letters_) single = single && l.size() == 1;
        std::string out;
        for (std::size_t i = 0; i < word.size(); ++i) {
            if (!single && i > 0) out += '.';
            out += name(static_cast<Letter>(word[i]));
        }
        return out;
    }

    friend bool operator==(const Alphabet& a, const Alphabet& b) { return a.letters_ == b.letters_; }

private:
    std::vector<std::string> letters_;
    std::map<std::string, Letter> index_;
};

} // namespace pka
