#pragma once

#include <algorithm>
#include <string>
#include <string_view>
#include <vector>

namespace kds {

namespace detail {

inline bool is_digit(char c) noexcept { return c >= '0' && c <= '9'; }

// Three-way comparison of two digit runs by integer value, without overflow.
inline int compare_digit_runs(std::string_view a, std::string_view b) noexcept
{
    const auto strip = [](std::string_view s) {
        const auto nz = s.find_first_not_of('0');
        return nz == std::string_view::npos ? std::string_view{} : s.substr(nz);
    };
    const auto sa = strip(a);
    const auto sb = strip(b);
    if (sa.size() != sb.size())
        return sa.size() < sb.size() ? -1 : 1;
    const int c = sa.compare(sb);
    return c < 0 ? -1 : (c > 0 ? 1 : 0);
}

} // namespace detail

/// Natural-order three-way comparison. Digit runs compare as integers, all other
/// characters by unsigned byte value. Strings equal under that rule (e.g. "a01"
/// and "a1") fall back to a plain byte comparison so the order stays total.
inline int natural_compare(std::string_view a, std::string_view b) noexcept
{
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < a.size() && j < b.size()) {
        if (detail::is_digit(a[i]) && detail::is_digit(b[j])) {
            std::size_t ie = i;
            while (ie < a.size() && detail::is_digit(a[ie]))
                ++ie;
            std::size_t je = j;
            while (je < b.size() && detail::is_digit(b[je]))
                ++je;
            if (const int c = detail::compare_digit_runs(a.substr(i, ie - i), b.substr(j, je - j)))
                return c;
            i = ie;
            j = je;
            continue;
        }
        const auto ca = static_cast<unsigned char>(a[i]);
        const auto cb = static_cast<unsigned char>(b[j]);
        if (ca != cb)
            return ca < cb ? -1 : 1;
        ++i;
        ++j;
    }
    const bool a_done = i == a.size();
    const bool b_done = j == b.size();
    if (!a_done || !b_done)
        return a_done ? -1 : 1;
    const int c = a.compare(b);
    return c < 0 ? -1 : (c > 0 ? 1 : 0);
}

struct NaturalLess {
    bool operator()(std::string_view a, std::string_view b) const noexcept
    {
        return natural_compare(a, b) < 0;
    }
};

inline std::vector<std::string> order_slices(std::vector<std::string> filenames)
{
    std::ranges::stable_sort(filenames, NaturalLess{});
    return filenames;
}

} // namespace kds
