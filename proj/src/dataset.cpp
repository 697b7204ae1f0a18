// SPDX-License-Identifier: Apache-2.0
#include "fldiag/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>
#include <unordered_map>

#include "fldiag/linalg.hpp"
#include "fldiag/toml.hpp"

namespace fldiag {

namespace fs = std::filesystem;

void MspSpec::validate() const {
    check(!sets.empty(), "msp: set list must be non-empty");
    std::set<std::vector<int>> seen;
    for (auto s : sets) {
        check(!s.empty(), "msp: sets must be non-empty");
        for (int i : s)
            check(i >= 0 && static_cast<std::size_t>(i) < input_dim,
                  "msp: index out of range");
        std::sort(s.begin(), s.end());
        check(std::adjacent_find(s.begin(), s.end()) == s.end(),
              "msp: duplicate index within a set");
        check(seen.insert(s).second, "msp: duplicate set");
    }
    check(coefficients.empty() || coefficients.size() == sets.size(),
          "msp: coefficient count must match set count");
}

MspSpec MspSpec::paper_default() {
    MspSpec spec;
    spec.input_dim = 30;
    spec.sets = {{7}, {2, 7}, {0, 2, 7}, {5, 7, 4}, {1}, {0, 4}, {3, 7},
                 {0, 1, 2, 3, 4, 6, 7}};
    return spec;
}

void MultiIndexSpec::validate() const {
    check(latent_dim <= input_dim, "multi_index: latent_dim must be <= input_dim");
    check(latent_dim >= 1, "multi_index: latent_dim must be >= 1");
    check(max_degree >= 1, "multi_index: max_degree must be >= 1");
    check(noise_std >= 0.0, "multi_index: noise_std must be >= 0");
}

namespace {

bool msp_search(const std::vector<std::uint64_t>& set_bits, std::uint32_t used,
                std::uint64_t covered, std::unordered_map<std::uint32_t, bool>& memo) {
    if (used == (1u << set_bits.size()) - 1) return true;
    auto it = memo.find(used);
    if (it != memo.end()) return it->second;
    bool ok = false;
    for (std::size_t i = 0; i < set_bits.size() && !ok; ++i) {
        if (used & (1u << i)) continue;
        if ((set_bits[i] & ~covered) == 0) continue; // no novel element
        ok = msp_search(set_bits, used | (1u << i), covered | set_bits[i], memo);
    }
    memo.emplace(used, ok);
    return ok;
}

} // namespace

bool msp_check(const std::vector<std::vector<int>>& sets) {
    check(!sets.empty(), "msp_check: set list must be non-empty");
    check(sets.size() <= 32, "msp_check: at most 32 sets supported");
    std::vector<std::uint64_t> bits;
    bits.reserve(sets.size());
    int max_index = 0;
    for (const auto& s : sets) {
        check(!s.empty(), "msp_check: sets must be non-empty");
        for (int i : s) max_index = std::max(max_index, i);
    }
    check(max_index < 64, "msp_check: indices must be < 64");
    for (const auto& s : sets) {
        std::uint64_t b = 0;
        for (int i : s) b |= 1ull << i;
        bits.push_back(b);
    }
    std::unordered_map<std::uint32_t, bool> memo;
    return msp_search(bits, 0, 0, memo);
}

double msp_eval(const MspSpec& spec, const std::vector<double>& z) {
    check(z.size() == spec.input_dim, "msp_eval: wrong input length");
    for (double v : z)
        check(v == 1.0 || v == -1.0, "msp_eval: entries must be +/-1");
    double total = 0.0;
    for (std::size_t i = 0; i < spec.sets.size(); ++i) {
        double monomial = 1.0;
        for (int idx : spec.sets[i]) monomial *= z[idx];
        total += spec.coefficient(i) * monomial;
    }
    return total;
}

Dataset gen_msp(const MspSpec& spec, std::size_t m, std::uint64_t seed) {
    spec.validate();
    check(m >= 1, "gen_msp: m must be >= 1");
    Rng rng = Rng(seed).child("msp_inputs");
    Dataset ds;
    ds.X = rademacher(rng, m, spec.input_dim);
    ds.Y = Matrix(m, 1);
    std::vector<double> z(spec.input_dim);
    for (std::size_t i = 0; i < m; ++i) {
        const double* row = ds.X.row(i);
        std::copy(row, row + spec.input_dim, z.begin());
        ds.Y(i, 0) = msp_eval(spec, z);
    }
    ds.meta.generator = "msp";
    ds.meta.seed = seed;
    ds.meta.msp = spec;
    return ds;
}

double MultiIndexTarget::eval(const double* x, std::size_t d) const {
    const std::size_t r = projection.cols();
    std::vector<double> latent(r, 0.0);
    for (std::size_t j = 0; j < r; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < d; ++k) s += projection(k, j) * x[k];
        latent[j] = s;
    }
    double total = 0.0;
    for (std::size_t t = 0; t < exponents.size(); ++t) {
        double term = coefficients[t];
        for (std::size_t j = 0; j < r; ++j)
            for (int rep = 0; rep < exponents[t][j]; ++rep) term *= latent[j];
        total += term;
    }
    return total;
}

namespace {

void enumerate_exponents(std::size_t r, std::size_t max_degree,
                         std::vector<int>& current, std::size_t pos,
                         std::size_t remaining, std::vector<std::vector<int>>& out) {
    if (pos == r) {
        out.push_back(current);
        return;
    }
    for (std::size_t e = 0; e <= remaining; ++e) {
        current[pos] = static_cast<int>(e);
        enumerate_exponents(r, max_degree, current, pos + 1, remaining - e, out);
    }
    current[pos] = 0;
}

} // namespace

MultiIndexTarget build_multi_index_target(const MultiIndexSpec& spec) {
    spec.validate();
    MultiIndexTarget target;
    Rng proj_rng = Rng(spec.seed).child("mi_projection");
    Matrix g = gaussian(proj_rng, spec.input_dim, spec.latent_dim, 1.0);
    target.projection = linalg::qr_orthonormal(g);

    std::vector<int> current(spec.latent_dim, 0);
    std::vector<std::vector<int>> all;
    enumerate_exponents(spec.latent_dim, spec.max_degree, current, 0, spec.max_degree, all);
    // Drop the constant term: it is absorbed by label normalization.
    for (auto& alpha : all) {
        bool zero = std::all_of(alpha.begin(), alpha.end(), [](int e) { return e == 0; });
        if (!zero) target.exponents.push_back(alpha);
    }
    Rng coeff_rng = Rng(spec.seed).child("mi_coefficients");
    target.coefficients.resize(target.exponents.size());
    for (auto& c : target.coefficients) c = coeff_rng.normal();
    return target;
}

Dataset gen_multi_index(const MultiIndexSpec& spec, std::size_t m, std::uint64_t seed,
                        std::optional<LabelStats> stats) {
    check(m >= 1, "gen_multi_index: m must be >= 1");
    MultiIndexTarget target = build_multi_index_target(spec);

    Rng x_rng = Rng(seed).child("mi_inputs");
    Rng noise_rng = Rng(seed).child("mi_noise");
    Dataset ds;
    ds.X = gaussian(x_rng, m, spec.input_dim, 1.0);
    ds.Y = Matrix(m, 1);
    for (std::size_t i = 0; i < m; ++i) {
        double y = target.eval(ds.X.row(i), spec.input_dim);
        if (spec.noise_std > 0.0)
            y += (noise_rng.next_u64() & 1u) ? spec.noise_std : -spec.noise_std;
        ds.Y(i, 0) = y;
    }

    LabelStats norm;
    if (stats) {
        norm = *stats;
    } else {
        double mean = 0.0;
        for (std::size_t i = 0; i < m; ++i) mean += ds.Y(i, 0);
        mean /= static_cast<double>(m);
        double var = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            double d = ds.Y(i, 0) - mean;
            var += d * d;
        }
        var /= static_cast<double>(m);
        norm.mean = mean;
        norm.std_dev = var > 0.0 ? std::sqrt(var) : 1.0;
    }
    for (std::size_t i = 0; i < m; ++i)
        ds.Y(i, 0) = (ds.Y(i, 0) - norm.mean) / norm.std_dev;

    ds.meta.generator = "multi_index";
    ds.meta.seed = seed;
    ds.meta.multi_index = spec;
    ds.meta.normalization = norm;
    return ds;
}

Dataset shuffle_labels(const Dataset& ds, std::uint64_t seed) {
    check(ds.size() >= 1, "shuffle_labels: dataset must be non-empty");
    Rng rng = Rng(seed).child("label_shuffle");
    auto perm = rng.permutation(ds.size());
    Dataset out = ds;
    for (std::size_t i = 0; i < ds.size(); ++i)
        for (std::size_t j = 0; j < ds.Y.cols(); ++j) out.Y(i, j) = ds.Y(perm[i], j);
    out.meta.shuffled = true;
    out.meta.permutation = perm;
    return out;
}

namespace {

toml::Value sets_to_toml(const std::vector<std::vector<int>>& sets) {
    toml::Array outer;
    for (const auto& s : sets) {
        toml::Array inner;
        for (int i : s) inner.emplace_back(i);
        outer.emplace_back(std::move(inner));
    }
    return toml::Value(std::move(outer));
}

std::vector<std::vector<int>> sets_from_toml(const toml::Value& v) {
    std::vector<std::vector<int>> sets;
    for (const auto& row : v.as_array()) {
        std::vector<int> s;
        for (const auto& e : row.as_array()) s.push_back(static_cast<int>(e.as_int()));
        sets.push_back(std::move(s));
    }
    return sets;
}

} // namespace

void save_dataset(const Dataset& ds, const std::string& dir) {
    fs::create_directories(dir);
    toml::Document doc;
    doc.root.set("generator", ds.meta.generator);
    doc.root.set("seed", ds.meta.seed);
    doc.root.set("shuffled", ds.meta.shuffled);
    doc.root.set("rows", ds.X.rows());
    doc.root.set("input_dim", ds.X.cols());
    doc.root.set("output_dim", ds.Y.cols());
    doc.root.set("rng_algorithm", std::string(Rng::algorithm));

    auto& norm = doc.section("normalization");
    norm.set("label_mean", ds.meta.normalization.mean);
    norm.set("label_std", ds.meta.normalization.std_dev);

    if (ds.meta.msp) {
        auto& t = doc.section("msp");
        t.set("input_dim", ds.meta.msp->input_dim);
        t.set("sets", sets_to_toml(ds.meta.msp->sets));
        if (!ds.meta.msp->coefficients.empty()) {
            toml::Array coeffs;
            for (double c : ds.meta.msp->coefficients) coeffs.emplace_back(c);
            t.set("coefficients", toml::Value(std::move(coeffs)));
        }
    }
    if (ds.meta.multi_index) {
        auto& t = doc.section("multi_index");
        t.set("input_dim", ds.meta.multi_index->input_dim);
        t.set("latent_dim", ds.meta.multi_index->latent_dim);
        t.set("max_degree", ds.meta.multi_index->max_degree);
        t.set("noise_std", ds.meta.multi_index->noise_std);
        t.set("seed", ds.meta.multi_index->seed);
    }
    if (!ds.meta.permutation.empty()) {
        toml::Array perm;
        for (std::size_t p : ds.meta.permutation) perm.emplace_back(p);
        doc.section("shuffle").set("permutation", toml::Value(std::move(perm)));
    }
    toml::write_file(doc, dir + "/meta.toml");
    save_matrix(ds.X, dir + "/X.bin");
    save_matrix(ds.Y, dir + "/Y.bin");
}

Dataset load_dataset(const std::string& dir) {
    toml::Document doc = toml::parse_file(dir + "/meta.toml");
    Dataset ds;
    ds.X = load_matrix(dir + "/X.bin");
    ds.Y = load_matrix(dir + "/Y.bin");
    ds.meta.generator = doc.root.get_string("generator", "external");
    ds.meta.seed = static_cast<std::uint64_t>(doc.root.get_int("seed", 0));
    ds.meta.shuffled = doc.root.get_bool("shuffled", false);
    if (doc.has_section("normalization")) {
        const auto& t = doc.section("normalization");
        ds.meta.normalization.mean = t.get_float("label_mean", 0.0);
        ds.meta.normalization.std_dev = t.get_float("label_std", 1.0);
    }
    if (doc.has_section("msp")) {
        const auto& t = doc.section("msp");
        MspSpec spec;
        spec.input_dim = static_cast<std::size_t>(t.get_int("input_dim", 0));
        spec.sets = sets_from_toml(t.at("sets"));
        if (t.has("coefficients"))
            spec.coefficients = t.get_float_array("coefficients", {});
        ds.meta.msp = spec;
    }
    if (doc.has_section("multi_index")) {
        const auto& t = doc.section("multi_index");
        MultiIndexSpec spec;
        spec.input_dim = static_cast<std::size_t>(t.get_int("input_dim", 0));
        spec.latent_dim = static_cast<std::size_t>(t.get_int("latent_dim", 0));
        spec.max_degree = static_cast<std::size_t>(t.get_int("max_degree", 1));
        spec.noise_std = t.get_float("noise_std", 0.0);
        spec.seed = static_cast<std::uint64_t>(t.get_int("seed", 0));
        ds.meta.multi_index = spec;
    }
    if (doc.has_section("shuffle")) {
        for (const auto& v : doc.section("shuffle").at("permutation").as_array())
            ds.meta.permutation.push_back(static_cast<std::size_t>(v.as_int()));
    }
    return ds;
}

void export_dataset_csv(const Dataset& ds, const std::string& dir) {
    fs::create_directories(dir);
    save_matrix_csv(ds.X, dir + "/X.csv");
    save_matrix_csv(ds.Y, dir + "/Y.csv");
}

} // namespace fldiag
