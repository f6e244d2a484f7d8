#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "errors.hpp"

namespace legknot {

// One incidence of a traversal through a crossing.
struct GaussEntry {
    int id = 0;
    bool over = false;
    int sign = 0;  // +1 / -1, shared by both incidences of a crossing; 0 = unknown
    bool operator==(const GaussEntry&) const = default;
};

using GaussCode = std::vector<GaussEntry>;

struct KnotSignature {
    int crossings = 0;  // after RM1 reduction
    long long determinant = 1;
    bool operator==(const KnotSignature&) const = default;
};

inline std::string to_string(const GaussCode& code) {
    std::string s;
    for (const auto& e : code) {
        if (!s.empty()) s += ' ';
        s += (e.over ? 'O' : 'U') + std::to_string(e.id);
        if (e.sign > 0) s += '+';
        else if (e.sign < 0) s += '-';
    }
    return s;
}

// parses "O1+ U2- ..." (sign suffix optional)
inline GaussCode parse_gauss_code(const std::string& text) {
    GaussCode code;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && (text[i] == ' ' || text[i] == ',')) ++i;
        if (i >= text.size()) break;
        GaussEntry e;
        char c = text[i++];
        if (c == 'O' || c == 'o') e.over = true;
        else if (c == 'U' || c == 'u') e.over = false;
        else throw error(errc::malformed_code, "expected O or U in '" + text + "'");
        std::size_t j = i;
        while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
        if (j == i) throw error(errc::malformed_code, "missing crossing id in '" + text + "'");
        e.id = std::stoi(text.substr(i, j - i));
        i = j;
        if (i < text.size() && (text[i] == '+' || text[i] == '-')) e.sign = text[i++] == '+' ? 1 : -1;
        code.push_back(e);
    }
    return code;
}

inline void validate(const GaussCode& code) {
    std::map<int, std::pair<int, int>> seen;  // id -> (#over, #under)
    std::map<int, int> sign;
    for (const auto& e : code) {
        auto& s = seen[e.id];
        (e.over ? s.first : s.second)++;
        auto it = sign.find(e.id);
        if (it == sign.end()) sign[e.id] = e.sign;
        else if (it->second != e.sign)
            throw error(errc::malformed_code, "sign mismatch at crossing " + std::to_string(e.id));
    }
    for (const auto& [id, s] : seen)
        if (s.first != 1 || s.second != 1)
            throw error(errc::malformed_code,
                        "crossing " + std::to_string(id) + " needs one over and one under incidence");
}

inline GaussCode reduce_rm1(GaussCode code) {
    bool changed = true;
    while (changed && !code.empty()) {
        changed = false;
        const std::size_t n = code.size();
        for (std::size_t i = 0; i < n; ++i) {
            if (code[i].id == code[(i + 1) % n].id) {
                int id = code[i].id;
                std::erase_if(code, [id](const GaussEntry& e) { return e.id == id; });
                changed = true;
                break;
            }
        }
    }
    return code;
}

inline GaussCode mirror(GaussCode code) {
    for (auto& e : code) {
        e.over = !e.over;
        e.sign = -e.sign;
    }
    return code;
}

// relabel ids 0..c-1 in order of first appearance
inline GaussCode canonical_ids(GaussCode code) {
    std::map<int, int> ids;
    for (auto& e : code) {
        auto [it, fresh] = ids.try_emplace(e.id, int(ids.size()));
        e.id = it->second;
    }
    return code;
}

namespace detail {

using bigint = boost::multiprecision::cpp_int;

// fraction-free Gaussian elimination
inline bigint bareiss_det(std::vector<std::vector<bigint>> m) {
    const std::size_t n = m.size();
    if (n == 0) return 1;
    bigint prev = 1;
    int sgn = 1;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (m[k][k] == 0) {
            std::size_t p = k + 1;
            while (p < n && m[p][k] == 0) ++p;
            if (p == n) return 0;
            std::swap(m[k], m[p]);
            sgn = -sgn;
        }
        for (std::size_t i = k + 1; i < n; ++i)
            for (std::size_t j = k + 1; j < n; ++j)
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
        prev = m[k][k];
    }
    return sgn * m[n - 1][n - 1];
}

} // namespace detail

// |Delta(-1)| from the coloring matrix: one row per crossing, one column per arc.
inline long long knot_determinant(const GaussCode& code) {
    validate(code);
    if (code.empty()) return 1;
    const std::size_t n = code.size();
    const int c = int(n / 2);
    std::map<int, int> row;
    for (const auto& e : code) row.try_emplace(e.id, int(row.size()));

    std::size_t first_under = 0;
    while (code[first_under].over) ++first_under;
    std::vector<int> arc(n);
    int cur = 0;
    for (std::size_t s = 1; s <= n; ++s) {
        std::size_t p = (first_under + s) % n;
        arc[p] = cur;
        if (!code[p].over) cur = (cur + 1) % c;
    }
    std::vector<int> over_pos(c);
    for (std::size_t p = 0; p < n; ++p)
        if (code[p].over) over_pos[row[code[p].id]] = int(p);

    std::vector<std::vector<detail::bigint>> m(c, std::vector<detail::bigint>(c, 0));
    for (std::size_t p = 0; p < n; ++p) {
        if (code[p].over) continue;
        int r = row[code[p].id];
        int in = arc[p], out = (arc[p] + 1) % c;
        m[r][arc[over_pos[r]]] += 2;
        m[r][in] -= 1;
        m[r][out] -= 1;
    }
    std::vector<std::vector<detail::bigint>> minor(c - 1, std::vector<detail::bigint>(c - 1));
    for (int i = 1; i < c; ++i)
        for (int j = 1; j < c; ++j) minor[i - 1][j - 1] = m[i][j];
    detail::bigint d = detail::bareiss_det(minor);
    if (d < 0) d = -d;
    return d.convert_to<long long>();
}

inline KnotSignature signature(const GaussCode& code) {
    GaussCode r = reduce_rm1(code);
    return {int(r.size() / 2), knot_determinant(r)};
}

} // namespace legknot
