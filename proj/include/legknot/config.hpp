#pragma once

// Run configuration: flat "key = value" text, '#' starts a comment.

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "parallel.hpp"

namespace legknot {

struct RunConfig {
    double residual_tol = 1e-9;        // S^3 and identity residual checks
    double coefficient_zero_tol = 1e-14;
    double newton_tol = 1e-9;
    double legendrian_tol = 1e-8;      // guard for tangent_section
    double nullspace_tol = 1e-8;
    double tie_tol = 1e-9;
    int initial_degree = 64;
    int degree_cap = 4096;
    int oversample = 8;
    std::string parity = "auto";
    int samples = 2048;
    int frame_samples = 256;
    std::vector<double> times{0, 0.5, -0.5, 1, -1, 2, -2, 5, -5, 100, -100, 1e6, -1e6};
    double escape_radius = 10;
    std::string out = ".";
    unsigned long long seed = 1;
    int threads = default_threads();

    // returns false for an unknown key
    bool set(const std::string& key, const std::string& value) {
        auto num = [&](auto& field) {
            std::istringstream is(value);
            is >> field;
            if (!is || !(is >> std::ws).eof()) throw error(errc::invalid_input, "bad value for " + key + ": " + value);
        };
        if (key == "residual_tol") num(residual_tol);
        else if (key == "coefficient_zero_tol") num(coefficient_zero_tol);
        else if (key == "newton_tol") num(newton_tol);
        else if (key == "legendrian_tol") num(legendrian_tol);
        else if (key == "nullspace_tol") num(nullspace_tol);
        else if (key == "tie_tol") num(tie_tol);
        else if (key == "initial_degree") num(initial_degree);
        else if (key == "degree_cap") num(degree_cap);
        else if (key == "oversample") num(oversample);
        else if (key == "parity") parity = value;
        else if (key == "samples") num(samples);
        else if (key == "frame_samples") num(frame_samples);
        else if (key == "times") times = parse_list(value);
        else if (key == "escape_radius") num(escape_radius);
        else if (key == "out") out = value;
        else if (key == "seed") num(seed);
        else if (key == "threads") num(threads);
        else return false;
        return true;
    }

    void check() const {
        for (double v : {residual_tol, coefficient_zero_tol, newton_tol, legendrian_tol, nullspace_tol, tie_tol})
            if (!(v > 0)) throw error(errc::invalid_input, "tolerances must be positive");
        if (initial_degree < 1 || degree_cap < initial_degree || oversample < 2)
            throw error(errc::invalid_input, "need 1 <= initial_degree <= degree_cap and oversample >= 2");
        if (samples < 8 || frame_samples < 8) throw error(errc::invalid_input, "too few samples");
        if (parity != "auto" && parity != "even" && parity != "all")
            throw error(errc::invalid_input, "parity must be auto, even or all");
        if (threads < 1) throw error(errc::invalid_input, "threads must be >= 1");
    }

    static std::vector<double> parse_list(const std::string& s) {
        std::vector<double> v;
        std::string item;
        std::istringstream is(s);
        while (std::getline(is, item, ',')) {
            std::size_t used = 0;
            try {
                v.push_back(std::stod(item, &used));
            } catch (const std::exception&) {
                throw error(errc::invalid_input, "bad number '" + item + "'");
            }
        }
        return v;
    }

    void load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw error(errc::invalid_input, "cannot open config " + path);
        std::string line;
        int no = 0;
        while (std::getline(in, line)) {
            ++no;
            line = line.substr(0, line.find('#'));
            auto eq = line.find('=');
            auto trim = [](std::string x) {
                x.erase(0, x.find_first_not_of(" \t\r"));
                x.erase(x.find_last_not_of(" \t\r") + 1);
                return x;
            };
            if (trim(line).empty()) continue;
            if (eq == std::string::npos)
                throw error(errc::invalid_input, path + ":" + std::to_string(no) + ": expected key = value");
            std::string k = trim(line.substr(0, eq)), v = trim(line.substr(eq + 1));
            if (!set(k, v)) throw error(errc::invalid_input, path + ":" + std::to_string(no) + ": unknown key " + k);
        }
    }
};

} // namespace legknot
