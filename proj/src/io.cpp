#include "wavekernel/io.hpp"

#include "wavekernel/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace wavekernel::io {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

double parse_real(std::string_view s, const std::string& what) {
    const std::string t = trim(s);
    double v = 0.0;
    const char* first = t.data();
    if (!t.empty() && t.front() == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
        throw InputError("cannot parse number '" + t + "' in " + what);
    return v;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream ss(line);
    while (std::getline(ss, cur, sep)) out.push_back(trim(cur));
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

// numeric rows of a CSV file; a first line that does not parse is a header
std::vector<std::vector<double>> read_numeric_csv(const fs::path& path) {
    std::istringstream in(read_file(path));
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line.front() == '#') continue;
        const auto cells = split(line, ',');
        if (rows.empty() && lineno == 1) {
            const std::string& c = cells.front();
            if (!c.empty() && !(std::isdigit(static_cast<unsigned char>(c.front())) || c.front() == '-' ||
                                c.front() == '+' || c.front() == '.'))
                continue;
        }
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& c : cells) row.push_back(parse_real(c, path.string() + " line " + std::to_string(lineno)));
        if (!rows.empty() && row.size() != rows.front().size())
            throw InputError(path.string() + " line " + std::to_string(lineno) + ": inconsistent column count");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw InputError(path.string() + ": no data rows");
    return rows;
}

void append_complex(std::string& out, cplx z) {
    out += ',';
    out += format_double(z.real());
    out += ',';
    out += format_double(z.imag());
}

std::size_t get_size(const std::map<std::string, std::string>& kv, const std::string& key, std::size_t fallback,
                     const std::string& origin) {
    const auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    const double v = parse_real(it->second, origin + " key " + key);
    if (!(v >= 1.0) || v != std::floor(v)) throw InputError(origin + ": " + key + " must be a positive integer");
    return static_cast<std::size_t>(v);
}

double get_real(const std::map<std::string, std::string>& kv, const std::string& key, double fallback,
                const std::string& origin) {
    const auto it = kv.find(key);
    return it == kv.end() ? fallback : parse_real(it->second, origin + " key " + key);
}

}  // namespace

std::map<std::string, std::string> parse_key_values(const std::string& text, const std::string& origin) {
    std::map<std::string, std::string> out;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InputError(origin + " line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        if (key.empty()) throw InputError(origin + " line " + std::to_string(lineno) + ": empty key");
        if (!out.emplace(key, value).second)
            throw InputError(origin + " line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
    return out;
}

std::map<std::string, std::string> read_key_value_file(const fs::path& path) {
    return parse_key_values(read_file(path), path.string());
}

cplx parse_complex(const std::string& text) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    if (s.empty()) throw InputError("cannot parse complex number ''");
    if (s.back() != 'i' && s.back() != 'j') return {parse_real(s, "complex '" + text + "'"), 0.0};
    s.pop_back();
    std::size_t cut = std::string::npos;
    for (std::size_t k = s.size(); k-- > 1;) {
        if ((s[k] == '+' || s[k] == '-') && s[k - 1] != 'e' && s[k - 1] != 'E') {
            cut = k;
            break;
        }
    }
    const std::string re = cut == std::string::npos ? "" : s.substr(0, cut);
    std::string im = cut == std::string::npos ? s : s.substr(cut);
    if (im.empty() || im == "+") im = "1";
    if (im == "-") im = "-1";
    return {re.empty() ? 0.0 : parse_real(re, "complex '" + text + "'"), parse_real(im, "complex '" + text + "'")};
}

Vector parse_complex_vector(const std::string& text) {
    std::string norm = text;
    std::replace(norm.begin(), norm.end(), ',', ' ');
    std::istringstream ss(norm);
    std::vector<cplx> vals;
    std::string tok;
    while (ss >> tok) vals.push_back(parse_complex(tok));
    if (vals.empty()) throw InputError("empty complex vector '" + text + "'");
    Vector v(static_cast<Eigen::Index>(vals.size()));
    for (std::size_t k = 0; k < vals.size(); ++k) v(static_cast<Eigen::Index>(k)) = vals[k];
    return v;
}

Matrix parse_complex_matrix(const std::string& text) {
    const auto rows = split(text, ';');
    std::vector<Vector> parsed;
    for (const auto& r : rows)
        if (!r.empty()) parsed.push_back(parse_complex_vector(r));
    if (parsed.empty()) throw InputError("empty matrix '" + text + "'");
    const auto cols = parsed.front().size();
    Matrix m(static_cast<Eigen::Index>(parsed.size()), cols);
    for (std::size_t r = 0; r < parsed.size(); ++r) {
        if (parsed[r].size() != cols) throw InputError("ragged matrix '" + text + "'");
        m.row(static_cast<Eigen::Index>(r)) = parsed[r].transpose();
    }
    return m;
}

PotentialDescription read_potential_description(const fs::path& path) {
    const auto kv = read_key_value_file(path);
    const std::string origin = path.string();
    for (const auto& [key, value] : kv) {
        static const char* known[] = {"kind", "dimension", "x_max", "step", "matrix", "samples", "preset"};
        if (std::find(std::begin(known), std::end(known), key) == std::end(known))
            throw InputError(origin + ": unknown key '" + key + "'");
    }
    const auto kind = kv.find("kind");
    if (kind == kv.end()) throw InputError(origin + ": missing key 'kind'");

    PotentialDescription d;
    d.dimension = get_size(kv, "dimension", 1, origin);
    d.x_max = get_real(kv, "x_max", 0.0, origin);
    d.step = get_real(kv, "step", 0.0, origin);
    if (kind->second == "zero") {
        d.kind = PotentialDescription::Kind::zero;
    } else if (kind->second == "constant") {
        d.kind = PotentialDescription::Kind::constant;
        const auto m = kv.find("matrix");
        if (m == kv.end()) throw InputError(origin + ": constant potential needs 'matrix'");
        d.constant = parse_complex_matrix(m->second);
        if (kv.count("dimension") && static_cast<std::size_t>(d.constant.rows()) != d.dimension)
            throw InputError(origin + ": matrix size does not match dimension");
        d.dimension = static_cast<std::size_t>(d.constant.rows());
    } else if (kind->second == "sampled") {
        d.kind = PotentialDescription::Kind::sampled;
        const auto s = kv.find("samples");
        if (s == kv.end()) throw InputError(origin + ": sampled potential needs 'samples'");
        fs::path csv = s->second;
        if (csv.is_relative()) csv = path.parent_path() / csv;
        const auto rows = read_numeric_csv(csv);
        const std::size_t n = d.dimension;
        if (rows.front().size() != 1 + 2 * n * n)
            throw InputError(csv.string() + ": expected " + std::to_string(1 + 2 * n * n) + " columns");
        const auto ni = static_cast<Eigen::Index>(n);
        for (const auto& r : rows) {
            d.sample_x.push_back(r[0]);
            Matrix m(ni, ni);
            for (std::size_t k = 0; k < n * n; ++k)
                m(static_cast<Eigen::Index>(k / n), static_cast<Eigen::Index>(k % n)) = cplx(r[1 + 2 * k], r[2 + 2 * k]);
            d.sample_values.push_back(std::move(m));
        }
    } else if (kind->second == "preset") {
        d.kind = PotentialDescription::Kind::preset;
        const auto s = kv.find("preset");
        if (s == kv.end()) throw InputError(origin + ": preset potential needs 'preset'");
        d.preset = s->second;
    } else {
        throw InputError(origin + ": unknown kind '" + kind->second + "'");
    }
    return d;
}

PotentialGrid load_potential(const fs::path& path, double cover, double default_step) {
    PotentialDescription d = read_potential_description(path);
    if (d.kind != PotentialDescription::Kind::sampled) {
        d.x_max = std::max(d.x_max, cover);
        if (!(d.step > 0.0)) d.step = default_step;
        if (!(d.step > 0.0)) throw InputError(path.string() + ": missing 'step'");
        if (!(d.x_max > 0.0)) throw InputError(path.string() + ": missing 'x_max'");
    }
    return build_potential(d);
}

std::string format_double(double v) {
    char buf[32];
    const int len = std::snprintf(buf, sizeof buf, "%.17g", v == 0.0 ? 0.0 : v);
    return std::string(buf, static_cast<std::size_t>(len));
}

std::string kernel_csv(const KernelField& field) {
    const std::size_t n = field.dimension();
    const std::size_t m = field.lattice_size();
    const double h = field.step();
    std::string out = "xi,eta";
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) {
            const std::string tag = "v" + std::to_string(r) + std::to_string(c);
            out += "," + tag + "_re," + tag + "_im";
        }
    out += '\n';
    for (std::size_t i = 0; i <= m; ++i) {
        for (std::size_t j = i; j <= m; ++j) {
            out += format_double(h * static_cast<double>(i));
            out += ',';
            out += format_double(h * static_cast<double>(j));
            const cplx* d = field.v().data(i, j);
            for (std::size_t k = 0; k < n * n; ++k) append_complex(out, d[k]);
            out += '\n';
        }
    }
    return out;
}

void write_kernel_csv(const fs::path& path, const KernelField& field) { write_text(path, kernel_csv(field)); }

KernelField read_kernel_csv(const fs::path& path, const PotentialGrid& p) {
    const auto rows = read_numeric_csv(path);
    const std::size_t n = p.dimension();
    if (rows.front().size() != 2 + 2 * n * n)
        throw InputError(path.string() + ": kernel dump does not match the potential dimension");
    // node count (m + 1)(m + 2) / 2
    const double disc = std::sqrt(1.0 + 8.0 * static_cast<double>(rows.size()));
    const auto m = static_cast<std::size_t>(std::llround((disc - 3.0) / 2.0));
    if (m < 2 || (m + 1) * (m + 2) / 2 != rows.size())
        throw InputError(path.string() + ": row count is not a triangular lattice");
    const double eta_max = rows.back()[1];
    const double T = 0.5 * eta_max;
    const double h = eta_max / static_cast<double>(m);
    TriangleField v(m, n);
    std::size_t k = 0;
    for (std::size_t i = 0; i <= m; ++i)
        for (std::size_t j = i; j <= m; ++j, ++k) {
            const auto& r = rows[k];
            if (std::abs(r[0] - h * static_cast<double>(i)) > 1e-9 * eta_max ||
                std::abs(r[1] - h * static_cast<double>(j)) > 1e-9 * eta_max)
                throw InputError(path.string() + ": node order broken at row " + std::to_string(k + 2));
            cplx* d = v.data(i, j);
            for (std::size_t e = 0; e < n * n; ++e) d[e] = cplx(r[2 + 2 * e], r[3 + 2 * e]);
        }
    return kernel_from_values(p, T, h, std::move(v), 0, 0.0);
}

std::string snapshot_csv(const WaveSnapshot& s) {
    const std::size_t n = s.dimension();
    std::string out = "x";
    for (const char* name : {"u", "u_x", "u_xx"})
        for (std::size_t c = 0; c < n; ++c) {
            const std::string tag = std::string(name) + std::to_string(c);
            out += "," + tag + "_re," + tag + "_im";
        }
    out += '\n';
    for (std::size_t i = 0; i < s.x.size(); ++i) {
        out += format_double(s.x[i]);
        const auto col = static_cast<Eigen::Index>(i);
        for (const Eigen::MatrixXcd* m : {&s.u, &s.u_x, &s.u_xx})
            for (Eigen::Index c = 0; c < m->rows(); ++c) append_complex(out, (*m)(c, col));
        out += '\n';
    }
    return out;
}

void write_snapshot_csv(const fs::path& path, const WaveSnapshot& s) { write_text(path, snapshot_csv(s)); }

SampledFunction read_snapshot_u(const fs::path& path, std::size_t dimension) {
    const auto rows = read_numeric_csv(path);
    const std::size_t cols = rows.front().size();
    if (cols != 1 + 2 * dimension && cols != 1 + 6 * dimension)
        throw InputError(path.string() + ": column count does not match dimension " + std::to_string(dimension));
    if (rows.size() < 3) throw InputError(path.string() + ": need at least 3 nodes");
    SampledFunction g;
    g.T = rows.back()[0];
    const auto n = static_cast<Eigen::Index>(dimension);
    g.values.resize(n, static_cast<Eigen::Index>(rows.size()));
    const double d = g.T / static_cast<double>(rows.size() - 1);
    for (std::size_t k = 0; k < rows.size(); ++k) {
        if (std::abs(rows[k][0] - d * static_cast<double>(k)) > 1e-9 * std::max(1.0, g.T))
            throw InputError(path.string() + ": nonuniform x column at row " + std::to_string(k + 2));
        for (Eigen::Index c = 0; c < n; ++c)
            g.values(c, static_cast<Eigen::Index>(k)) =
                cplx(rows[k][1 + 2 * static_cast<std::size_t>(c)], rows[k][2 + 2 * static_cast<std::size_t>(c)]);
    }
    return g;
}

std::string sampled_csv(const SampledFunction& g, const std::string& axis) {
    const auto n = g.values.rows();
    std::string out = axis;
    for (Eigen::Index c = 0; c < n; ++c) {
        const std::string tag = "g" + std::to_string(c);
        out += "," + tag + "_re," + tag + "_im";
    }
    out += '\n';
    const std::size_t N = g.intervals();
    for (std::size_t k = 0; k <= N; ++k) {
        out += format_double(k == N ? g.T : g.T * static_cast<double>(k) / static_cast<double>(N));
        for (Eigen::Index c = 0; c < n; ++c) append_complex(out, g.values(c, static_cast<Eigen::Index>(k)));
        out += '\n';
    }
    return out;
}

void write_sampled_csv(const fs::path& path, const SampledFunction& g, const std::string& axis) {
    write_text(path, sampled_csv(g, axis));
}

Eigen::MatrixXcd read_control_samples(const fs::path& path, std::size_t dimension, double& horizon) {
    const auto rows = read_numeric_csv(path);
    if (rows.front().size() != 1 + 2 * dimension)
        throw InputError(path.string() + ": expected " + std::to_string(1 + 2 * dimension) + " columns");
    if (std::abs(rows.front()[0]) > 1e-12) throw InputError(path.string() + ": samples must start at t = 0");
    horizon = rows.back()[0];
    const double d = horizon / static_cast<double>(rows.size() - 1);
    const auto n = static_cast<Eigen::Index>(dimension);
    Eigen::MatrixXcd out(n, static_cast<Eigen::Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) {
        if (std::abs(rows[k][0] - d * static_cast<double>(k)) > 1e-9 * std::max(1.0, horizon))
            throw InputError(path.string() + ": nonuniform t column at row " + std::to_string(k + 2));
        for (Eigen::Index c = 0; c < n; ++c)
            out(c, static_cast<Eigen::Index>(k)) =
                cplx(rows[k][1 + 2 * static_cast<std::size_t>(c)], rows[k][2 + 2 * static_cast<std::size_t>(c)]);
    }
    return out;
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + path.string());
    out << text;
    if (!out) throw InputError("write failed for " + path.string());
}

}  // namespace wavekernel::io
