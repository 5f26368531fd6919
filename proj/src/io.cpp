#include "mmflow/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace mmflow {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

Rational parse_rational(const std::string& s) {
    const auto slash = s.find('/');
    if (slash == std::string::npos || slash == 0 || slash + 1 >= s.size())
        throw InputError("weight string must look like \"k/N\": " + s);
    try {
        const long long num = std::stoll(s.substr(0, slash));
        const long long den = std::stoll(s.substr(slash + 1));
        if (num < 0 || den <= 0) throw InputError("weight rational must be nonnegative with positive denominator: " + s);
        return {num, den};
    } catch (const InputError&) {
        throw;
    } catch (const std::exception&) {
        throw InputError("unparsable weight rational: " + s);
    }
}

}  // namespace

FiniteSpace space_from_json(const json& j) {
    if (!j.is_object()) throw InputError("space file: top level must be an object");
    if (!j.contains("weights") || !j.contains("gauge")) throw InputError("space file: need \"weights\" and \"gauge\"");
    const json& jw = j.at("weights");
    const json& jg = j.at("gauge");
    if (!jw.is_array() || jw.empty()) throw InputError("space file: \"weights\" must be a nonempty array");
    const int n = static_cast<int>(jw.size());

    std::vector<double> weights(static_cast<std::size_t>(n));
    std::vector<Rational> rationals;
    bool any_rational = false, all_rational = true;
    std::vector<Rational> parsed(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const json& e = jw[static_cast<std::size_t>(i)];
        if (e.is_string()) {
            parsed[static_cast<std::size_t>(i)] = parse_rational(e.get<std::string>());
            weights[static_cast<std::size_t>(i)] = static_cast<double>(parsed[static_cast<std::size_t>(i)].num) /
                                                   static_cast<double>(parsed[static_cast<std::size_t>(i)].den);
            any_rational = true;
        } else if (e.is_number()) {
            weights[static_cast<std::size_t>(i)] = e.get<double>();
            all_rational = false;
        } else {
            throw InputError("space file: weights must be numbers or \"k/N\" strings");
        }
    }
    if (any_rational && all_rational) rationals = std::move(parsed);

    if (!jg.is_array() || static_cast<int>(jg.size()) != n)
        throw InputError("space file: \"gauge\" must be an n x n array of arrays");
    std::vector<double> gauge(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i) {
        const json& row = jg[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<int>(row.size()) != n)
            throw InputError("space file: gauge row " + std::to_string(i) + " has wrong length");
        for (int k = 0; k < n; ++k) {
            const json& e = row[static_cast<std::size_t>(k)];
            if (!e.is_number()) throw InputError("space file: gauge entries must be numbers");
            gauge[static_cast<std::size_t>(i) * n + k] = e.get<double>();
        }
    }
    std::string name;
    if (j.contains("name")) {
        if (!j.at("name").is_string()) throw InputError("space file: \"name\" must be a string");
        name = j.at("name").get<std::string>();
    }
    return make_space(n, std::move(gauge), std::move(weights), std::move(name), std::move(rationals));
}

FiniteSpace read_space_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open space file: " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw InputError("space file " + path + ": " + e.what());
    }
    try {
        return space_from_json(j);
    } catch (const InputError& e) {
        throw InputError(path + ": " + e.what());
    }
}

std::string space_to_json_text(const FiniteSpace& X) {
    std::ostringstream out;
    out << "{\n  \"weights\": [";
    const bool exact = !X.rationals.empty();
    for (int i = 0; i < X.n; ++i) {
        if (i) out << ", ";
        if (exact)
            out << '"' << X.rationals[static_cast<std::size_t>(i)].num << '/'
                << X.rationals[static_cast<std::size_t>(i)].den << '"';
        else
            out << format_double(X.w(i));
    }
    out << "],\n  \"gauge\": [\n";
    for (int i = 0; i < X.n; ++i) {
        out << "    [";
        for (int k = 0; k < X.n; ++k) {
            if (k) out << ", ";
            out << format_double(X.g(i, k));
        }
        out << (i + 1 < X.n ? "],\n" : "]\n");
    }
    out << "  ]";
    if (!X.name.empty()) {
        out << ",\n  \"name\": " << json(X.name).dump();
    }
    out << "\n}\n";
    return out.str();
}

void write_space_file(const FiniteSpace& X, const std::string& path) {
    write_text_file(path, space_to_json_text(X));
}

json coupling_to_json(const Coupling& c) {
    json j;
    json plan = json::array();
    for (int i = 0; i < c.rows; ++i) {
        json row = json::array();
        for (int k = 0; k < c.cols; ++k) row.push_back(c.p(i, k));
        plan.push_back(std::move(row));
    }
    j["plan"] = std::move(plan);
    j["rows"] = c.rows;
    j["cols"] = c.cols;
    return j;
}

json matrix_to_json(int n, const std::vector<double>& row_major) {
    json rows = json::array();
    for (int i = 0; i < n; ++i) {
        json row = json::array();
        for (int k = 0; k < n; ++k) row.push_back(row_major[static_cast<std::size_t>(i) * n + k]);
        rows.push_back(std::move(row));
    }
    return rows;
}

json number_to_json(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write file: " + path);
    out << content;
    if (!out) throw InputError("write failed: " + path);
}

}  // namespace mmflow
