#include "medbounds/errors.hpp"
#include "medbounds/world.hpp"

#include <toml.hpp>

#include <fstream>
#include <sstream>

namespace medbounds {

namespace {

toml::array to_array(const std::vector<double>& v) {
    toml::array out;
    for (double x : v) out.push_back(x);
    return out;
}

toml::array nested(const std::vector<std::size_t>& flat, const std::vector<std::size_t>& dims,
                   std::size_t depth, std::size_t& pos) {
    toml::array out;
    for (std::size_t i = 0; i < dims[depth]; ++i) {
        if (depth + 1 == dims.size()) {
            out.push_back(static_cast<std::int64_t>(flat.at(pos++)));
        } else {
            out.push_back(nested(flat, dims, depth + 1, pos));
        }
    }
    return out;
}

const toml::node& lookup(const toml::table& t, const std::string& key) {
    const toml::node* n = t.get(key);
    if (!n) fail(ErrorCode::Config, "world file is missing '" + key + "'");
    return *n;
}

const toml::array& as_array(const toml::node& n, const std::string& key) {
    const toml::array* a = n.as_array();
    if (!a) fail(ErrorCode::Config, "'" + key + "' must be an array");
    return *a;
}

double as_double(const toml::node& n, const std::string& key) {
    if (auto v = n.value<double>()) return *v;
    fail(ErrorCode::Config, "'" + key + "' must hold numbers");
}

std::size_t as_index(const toml::node& n, const std::string& key) {
    const auto v = n.value<std::int64_t>();
    if (!v || *v < 0 || !n.is_integer()) {
        fail(ErrorCode::Config, "'" + key + "' must hold nonnegative integers");
    }
    return static_cast<std::size_t>(*v);
}

std::vector<double> doubles(const toml::node& n, const std::string& key) {
    std::vector<double> out;
    for (const auto& e : as_array(n, key)) out.push_back(as_double(e, key));
    return out;
}

std::vector<std::vector<double>> double_rows(const toml::node& n, const std::string& key) {
    std::vector<std::vector<double>> out;
    for (const auto& e : as_array(n, key)) out.push_back(doubles(e, key));
    return out;
}

void flatten(const toml::node& n, const std::vector<std::size_t>& dims, std::size_t depth,
             const std::string& key, std::vector<std::size_t>& out) {
    const toml::array& a = as_array(n, key);
    if (a.size() != dims[depth]) {
        fail(ErrorCode::Config, "'" + key + "' has " + std::to_string(a.size()) +
                                    " entries at depth " + std::to_string(depth) + ", expected " +
                                    std::to_string(dims[depth]));
    }
    for (const auto& e : a) {
        if (depth + 1 == dims.size()) {
            out.push_back(as_index(e, key));
        } else {
            flatten(e, dims, depth + 1, key, out);
        }
    }
}

}  // namespace

std::string world_to_toml(const WorldSpec& spec) {
    spec.validate();
    toml::table t;
    t.insert("y_values", to_array(spec.y_values));
    t.insert("m_levels", static_cast<std::int64_t>(spec.m_levels));
    toml::array rc;
    for (std::size_t k : spec.r_components) rc.push_back(static_cast<std::int64_t>(k));
    t.insert("r_components", std::move(rc));
    t.insert("p_comparison", spec.p_comparison);
    t.insert("p_c", to_array(spec.p_c));
    t.insert("p_h", to_array(spec.p_h));
    t.insert("p_eps_r", to_array(spec.p_eps_r));
    t.insert("p_eps_m", toml::array{to_array(spec.p_eps_m[0]), to_array(spec.p_eps_m[1])});
    t.insert("p_eps_y", toml::array{to_array(spec.p_eps_y[0]), to_array(spec.p_eps_y[1])});
    if (!spec.coupling.empty()) {
        toml::array rows;
        const std::size_t ney = spec.eps_y_size();
        for (std::size_t i = 0; i < spec.eps_m_size(); ++i) {
            rows.push_back(to_array(std::vector<double>(
                spec.coupling.begin() + static_cast<std::ptrdiff_t>(i * ney),
                spec.coupling.begin() + static_cast<std::ptrdiff_t>((i + 1) * ney))));
        }
        t.insert("coupling", std::move(rows));
    }
    const std::size_t nr = spec.r_levels(), nc = spec.c_levels(), nh = spec.h_levels();
    std::size_t pos = 0;
    t.insert("g_r", nested(spec.g_r, {2, nc, nh, spec.eps_r_size()}, 0, pos));
    pos = 0;
    t.insert("g_m", nested(spec.g_m, {2, nr, nc, spec.eps_m_size()}, 0, pos));
    pos = 0;
    t.insert("g_y", nested(spec.g_y, {2, nr, spec.m_levels, nc, nh, spec.eps_y_size()}, 0, pos));

    std::ostringstream os;
    os << "# g_r[x][c][h][e_r], g_m[x][r][c][e_m], g_y[x][r][m][c][h][e_y]; x = 0 is the baseline\n";
    os << t << '\n';
    return os.str();
}

WorldSpec world_from_toml(const std::string& text) {
    toml::table t;
    try {
        t = toml::parse(text);
    } catch (const toml::parse_error& e) {
        fail(ErrorCode::Parse, std::string("world file: ") + std::string(e.description()));
    }
    WorldSpec w;
    w.y_values = doubles(lookup(t, "y_values"), "y_values");
    w.m_levels = as_index(lookup(t, "m_levels"), "m_levels");
    w.r_components.clear();
    if (const toml::node* rc = t.get("r_components")) {
        for (const auto& e : as_array(*rc, "r_components")) {
            w.r_components.push_back(as_index(e, "r_components"));
        }
    }
    if (const toml::node* pa = t.get("p_comparison")) w.p_comparison = as_double(*pa, "p_comparison");
    if (const toml::node* pc = t.get("p_c")) w.p_c = doubles(*pc, "p_c");
    if (const toml::node* ph = t.get("p_h")) w.p_h = doubles(*ph, "p_h");
    w.p_eps_r = doubles(lookup(t, "p_eps_r"), "p_eps_r");
    for (const char* key : {"p_eps_m", "p_eps_y"}) {
        auto rows = double_rows(lookup(t, key), key);
        if (rows.size() != 2) fail(ErrorCode::Config, std::string("'") + key + "' needs two rows");
        auto& dst = std::string(key) == "p_eps_m" ? w.p_eps_m : w.p_eps_y;
        dst = {std::move(rows[0]), std::move(rows[1])};
    }
    w.coupling.clear();
    if (const toml::node* k = t.get("coupling")) {
        for (auto& row : double_rows(*k, "coupling")) {
            if (row.size() != w.eps_y_size()) {
                fail(ErrorCode::Config, "'coupling' rows must have one entry per e_y");
            }
            w.coupling.insert(w.coupling.end(), row.begin(), row.end());
        }
    }
    const std::size_t nr = w.r_levels(), nc = w.c_levels(), nh = w.h_levels();
    w.g_r.clear();
    flatten(lookup(t, "g_r"), {2, nc, nh, w.eps_r_size()}, 0, "g_r", w.g_r);
    w.g_m.clear();
    flatten(lookup(t, "g_m"), {2, nr, nc, w.eps_m_size()}, 0, "g_m", w.g_m);
    w.g_y.clear();
    flatten(lookup(t, "g_y"), {2, nr, w.m_levels, nc, nh, w.eps_y_size()}, 0, "g_y", w.g_y);
    try {
        w.validate();
    } catch (const Error& e) {
        fail(ErrorCode::Config, std::string("world file: ") + e.what());
    }
    return w;
}

WorldSpec load_world(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::Io, "cannot open world file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return world_from_toml(ss.str());
}

}  // namespace medbounds
