#pragma once

#include "sag/errors.hpp"

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sag::detail {

/// Line-oriented reader for the whitespace-separated text formats.
/// Blank lines and '#'-prefixed lines are skipped; errors carry file:line.
class TextReader {
public:
    explicit TextReader(const std::filesystem::path& path) : path_(path.string()), in_(path) {
        if (!in_) throw InputError(path_ + ": cannot open file");
    }

    /// Tokens of the next non-comment line, or nullopt at end of file.
    /// Views stay valid until the next call.
    std::optional<std::vector<std::string_view>> next_tokens(std::string_view delims = " \t\r") {
        while (std::getline(in_, line_)) {
            ++line_no_;
            std::string_view sv(line_);
            const auto first = sv.find_first_not_of(" \t\r");
            if (first == std::string_view::npos || sv[first] == '#') continue;
            std::vector<std::string_view> tok;
            std::size_t pos = 0;
            while (pos < sv.size()) {
                const auto start = sv.find_first_not_of(delims, pos);
                if (start == std::string_view::npos) break;
                auto stop = sv.find_first_of(delims, start);
                if (stop == std::string_view::npos) stop = sv.size();
                tok.push_back(sv.substr(start, stop - start));
                pos = stop;
            }
            return tok;
        }
        return std::nullopt;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw InputError(path_ + ":" + std::to_string(line_no_) + ": " + msg);
    }

    std::int64_t parse_int(std::string_view s) const {
        std::int64_t v = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size()) fail("expected an integer, got \"" + std::string(s) + "\"");
        return v;
    }

    double parse_real(std::string_view s) const {
        double v = 0.0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size()) fail("expected a real number, got \"" + std::string(s) + "\"");
        return v;
    }

    std::size_t line() const { return line_no_; }
    const std::string& path() const { return path_; }

private:
    std::string path_;
    std::ifstream in_;
    std::string line_;
    std::size_t line_no_ = 0;
};

}  // namespace sag::detail
