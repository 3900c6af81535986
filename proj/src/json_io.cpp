#include "qoptk/json_io.hpp"

#include <fstream>

namespace qoptk {

namespace {

json complex_to_json(const cxd& z) { return json::array({z.real(), z.imag()}); }

cxd complex_from_json(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw SchemaError(path, "expected complex scalar as [re, im]");
    return {j[0].get<double>(), j[1].get<double>()};
}

const json& expect_field(const json& j, const char* key, const std::string& path) {
    if (!j.is_object()) throw SchemaError(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) throw SchemaError(path + "." + key, "missing field");
    return *it;
}

int expect_positive_int(const json& j, const std::string& path) {
    if (!j.is_number_integer() || j.get<int>() <= 0)
        throw SchemaError(path, "expected a positive integer");
    return j.get<int>();
}

} // namespace

json to_json(const CMat& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(complex_to_json(m(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

CMat cmat_from_json(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) throw SchemaError(path, "expected a non-empty matrix array");
    const int rows = int(j.size());
    if (!j[0].is_array() || j[0].empty())
        throw SchemaError(path + "[0]", "expected a non-empty row array");
    const int cols = int(j[0].size());
    CMat m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        if (!j[r].is_array() || int(j[r].size()) != cols)
            throw SchemaError(path + "[" + std::to_string(r) + "]", "ragged matrix row");
        for (int c = 0; c < cols; ++c)
            m(r, c) = complex_from_json(j[r][c], path + "[" + std::to_string(r) + "][" +
                                                     std::to_string(c) + "]");
    }
    if (!m.all_finite()) throw SchemaError(path, "matrix contains NaN or Inf");
    return m;
}

json to_json(const CPMap& m) {
    json j;
    j["dim_in"] = m.dim_in;
    j["dim_out"] = m.dim_out;
    json kraus = json::array();
    for (const CMat& k : m.kraus) kraus.push_back(to_json(k));
    j["kraus"] = std::move(kraus);
    return j;
}

CPMap cpmap_from_json(const json& j, const std::string& path) {
    CPMap m;
    m.dim_in = expect_positive_int(expect_field(j, "dim_in", path), path + ".dim_in");
    m.dim_out = expect_positive_int(expect_field(j, "dim_out", path), path + ".dim_out");
    const json& kraus = expect_field(j, "kraus", path);
    if (!kraus.is_array() || kraus.empty())
        throw SchemaError(path + ".kraus", "expected a non-empty array of matrices");
    for (std::size_t a = 0; a < kraus.size(); ++a) {
        CMat k = cmat_from_json(kraus[a], path + ".kraus[" + std::to_string(a) + "]");
        if (k.rows() != m.dim_out || k.cols() != m.dim_in)
            throw SchemaError(path + ".kraus[" + std::to_string(a) + "]",
                              "Kraus operator must be dim_out x dim_in");
        m.kraus.push_back(std::move(k));
    }
    return m;
}

json to_json(const Tolerances& t) {
    json j;
    j["herm_tol"] = t.herm_tol;
    j["psd_tol"] = t.psd_tol;
    j["trace_tol"] = t.trace_tol;
    j["proj_tol"] = t.proj_tol;
    j["span_tol"] = t.span_tol;
    j["rank_tol"] = t.rank_tol;
    j["fixed_tol"] = t.fixed_tol;
    j["eff_tol"] = t.eff_tol;
    j["ds_eps"] = t.ds_eps;
    return j;
}

Tolerances tolerances_from_json(const json& j, const std::string& path) {
    Tolerances t;
    if (!j.is_object()) throw SchemaError(path, "expected an object");
    auto grab = [&](const char* key, double& slot) {
        auto it = j.find(key);
        if (it == j.end()) return;
        if (!it->is_number() || it->get<double>() <= 0.0)
            throw SchemaError(path + "." + key, "tolerances must be positive numbers");
        slot = it->get<double>();
    };
    grab("herm_tol", t.herm_tol);
    grab("psd_tol", t.psd_tol);
    grab("trace_tol", t.trace_tol);
    grab("proj_tol", t.proj_tol);
    grab("span_tol", t.span_tol);
    grab("rank_tol", t.rank_tol);
    grab("fixed_tol", t.fixed_tol);
    grab("eff_tol", t.eff_tol);
    grab("ds_eps", t.ds_eps);
    return t;
}

json to_json(const Observable& o) {
    json j;
    j["labels"] = o.labels;
    json effects = json::array();
    for (const CMat& e : o.effects) effects.push_back(to_json(e));
    j["effects"] = std::move(effects);
    return j;
}

Observable observable_from_json(const json& j, const std::string& path) {
    Observable o;
    const json& labels = expect_field(j, "labels", path);
    if (!labels.is_array() || labels.empty())
        throw SchemaError(path + ".labels", "expected a non-empty array of strings");
    for (const auto& l : labels) {
        if (!l.is_string()) throw SchemaError(path + ".labels", "labels must be strings");
        o.labels.push_back(l.get<std::string>());
    }
    const json& effects = expect_field(j, "effects", path);
    if (!effects.is_array() || effects.size() != o.labels.size())
        throw SchemaError(path + ".effects", "effects must parallel labels");
    for (std::size_t i = 0; i < effects.size(); ++i)
        o.effects.push_back(
            cmat_from_json(effects[i], path + ".effects[" + std::to_string(i) + "]"));
    return o;
}

json to_json(const Instrument& i) {
    json j;
    j["labels"] = i.labels;
    json ops = json::array();
    for (const CPMap& m : i.operations) ops.push_back(to_json(m));
    j["operations"] = std::move(ops);
    return j;
}

Instrument instrument_from_json(const json& j, const std::string& path) {
    Instrument inst;
    const json& labels = expect_field(j, "labels", path);
    if (!labels.is_array() || labels.empty())
        throw SchemaError(path + ".labels", "expected a non-empty array of strings");
    for (const auto& l : labels) {
        if (!l.is_string()) throw SchemaError(path + ".labels", "labels must be strings");
        inst.labels.push_back(l.get<std::string>());
    }
    const json& ops = expect_field(j, "operations", path);
    if (!ops.is_array() || ops.size() != inst.labels.size())
        throw SchemaError(path + ".operations", "operations must parallel labels");
    for (std::size_t i = 0; i < ops.size(); ++i)
        inst.operations.push_back(
            cpmap_from_json(ops[i], path + ".operations[" + std::to_string(i) + "]"));
    return inst;
}

json to_json(const MeasurementProcess& p) {
    json j;
    j["sys_dim"] = p.sys_dim;
    j["app_dim"] = p.app_dim;
    j["xi"] = to_json(p.xi);
    j["interaction"] = to_json(p.interaction);
    json pointer = json::array();
    for (const auto& [label, z] : p.pointer) {
        json entry;
        entry["label"] = label;
        entry["effect"] = to_json(z);
        pointer.push_back(std::move(entry));
    }
    j["pointer"] = std::move(pointer);
    return j;
}

MeasurementProcess process_from_json(const json& j, const std::string& path) {
    MeasurementProcess p;
    p.sys_dim = expect_positive_int(expect_field(j, "sys_dim", path), path + ".sys_dim");
    p.app_dim = expect_positive_int(expect_field(j, "app_dim", path), path + ".app_dim");
    p.xi = cmat_from_json(expect_field(j, "xi", path), path + ".xi");
    p.interaction = cpmap_from_json(expect_field(j, "interaction", path), path + ".interaction");
    const json& pointer = expect_field(j, "pointer", path);
    if (!pointer.is_array() || pointer.empty())
        throw SchemaError(path + ".pointer", "expected a non-empty array");
    for (std::size_t i = 0; i < pointer.size(); ++i) {
        const std::string p_path = path + ".pointer[" + std::to_string(i) + "]";
        const json& label = expect_field(pointer[i], "label", p_path);
        if (!label.is_string()) throw SchemaError(p_path + ".label", "expected a string");
        p.pointer.push_back({label.get<std::string>(),
                             cmat_from_json(expect_field(pointer[i], "effect", p_path),
                                            p_path + ".effect")});
    }
    return p;
}

json to_json(const MapClassification& c) {
    json j;
    j["trace_preserving"] = c.trace_preserving;
    j["unital"] = c.unital;
    j["bistochastic"] = c.bistochastic;
    j["strictly_positive"] = c.strictly_positive;
    j["purity_preserving"] = c.purity_preserving;
    j["compatible_effect"] = to_json(c.compatible_effect);
    j["margins"] = {{"trace_preserving", c.trace_preserving_margin},
                    {"unital", c.unital_margin},
                    {"strictly_positive", c.strictly_positive_margin},
                    {"purity", c.purity_margin}};
    return j;
}

json to_json(const EffectClass& c) {
    json j;
    j["trivial"] = c.trivial;
    j["norm_one"] = c.norm_one;
    j["indefinite"] = c.indefinite;
    j["projection"] = c.projection;
    j["strictly_positive"] = c.strictly_positive;
    j["min_eig"] = c.min_eig;
    j["max_eig"] = c.max_eig;
    if (c.eig1_projection) j["eig1_projection"] = to_json(*c.eig1_projection);
    return j;
}

json to_json(const ObservableClass& c) {
    json j;
    j["commutative"] = c.commutative;
    j["sharp"] = c.sharp;
    j["norm_one"] = c.norm_one;
    j["indefinite"] = c.indefinite;
    j["trivial"] = c.trivial;
    return j;
}

json to_json(const ScalingReport& r) {
    json j;
    j["c1"] = to_json(r.c1);
    j["c2"] = to_json(r.c2);
    j["ds_value"] = r.ds_value;
    j["iterations"] = r.iterations;
    j["converged"] = r.converged;
    j["singular_normalizer"] = r.singular_normalizer;
    return j;
}

json to_json(const RankDecision& d) {
    json j;
    j["verdict"] = to_string(d.verdict);
    if (d.witness) j["witness"] = to_json(*d.witness);
    if (d.counterexample) {
        json c;
        c["state"] = to_json(d.counterexample->state);
        c["rank_in"] = d.counterexample->rank_in;
        c["rank_out"] = d.counterexample->rank_out;
        c["on_dual"] = d.counterexample->on_dual;
        j["counterexample"] = std::move(c);
    }
    return j;
}

json to_json(const HierarchyVerdict& v) {
    json j;
    j["class_I"] = to_string(v.class_I);
    j["class_II"] = to_string(v.class_II);
    j["class_III"] = to_string(v.class_III);
    j["classification"] = to_json(v.classification);
    j["effect_class"] = to_json(v.effect_class);
    j["rank_decision"] = to_json(v.rank_decision);
    if (v.witness_iii) {
        json w;
        w["kind"] = v.witness_iii->kind;
        w["choi_min_eig"] = v.witness_iii->choi_min_eig;
        if (v.witness_iii->swap_effect) w["swap_effect"] = to_json(*v.witness_iii->swap_effect);
        if (v.witness_iii->swap_xi) w["swap_xi"] = to_json(*v.witness_iii->swap_xi);
        j["witness_III"] = std::move(w);
    }
    if (v.fixed_state) j["fixed_state"] = to_json(*v.fixed_state);
    j["has_fixed_point"] = v.has_fixed_point;
    if (v.fixed_point_projection)
        j["fixed_point_projection"] = to_json(*v.fixed_point_projection);
    if (!v.notes.empty()) j["notes"] = v.notes;
    return j;
}

json to_json(const ProcessClassReport& r) {
    json j;
    j["xi_strictly_positive"] = r.xi_strictly_positive;
    j["xi_min_eig"] = r.xi_min_eig;
    j["interaction_class"] = to_json(r.interaction_class);
    j["interaction_rank"] = to_json(r.interaction_rank);
    j["tier_I"] = to_string(r.tier_I);
    j["tier_II"] = to_string(r.tier_II);
    j["tier_III"] = to_string(r.tier_III);
    json tiers = json::array();
    for (int t = 1; t <= 3; ++t)
        if (r.admits(t)) tiers.push_back(t);
    j["admissible_tiers"] = std::move(tiers);
    return j;
}

json to_json(const PropertyResult& r) {
    json j;
    j["holds"] = r.holds;
    j["residuals"] = r.residuals;
    if (!r.reason.empty()) j["reason"] = r.reason;
    return j;
}

json to_json(const DisturbanceReport& r) {
    json j;
    j["repeatable"] = to_json(r.repeatable);
    j["first_kind"] = to_json(r.first_kind);
    j["value_reproducible"] = to_json(r.value_reproducible);
    j["ideal"] = to_json(r.ideal);
    j["nogo_conflicts"] = r.nogo_conflicts;
    return j;
}

json to_json(const InstrumentTiers& t) {
    json j;
    j["class_I"] = to_string(t.class_I);
    j["class_II"] = to_string(t.class_II);
    j["class_III"] = to_string(t.class_III);
    return j;
}

json to_json(const ClassicalAction& a) {
    json j;
    j["dim"] = a.dim;
    json rows = json::array();
    for (int m = 0; m < a.dim; ++m) {
        json row = json::array();
        for (int n = 0; n < a.dim; ++n) row.push_back(a.at(m, n));
        rows.push_back(std::move(row));
    }
    j["t_matrix"] = std::move(rows);
    json basis = json::array();
    for (const CMat& v : a.basis) basis.push_back(to_json(v));
    j["basis"] = std::move(basis);
    return j;
}

json to_json(const BlockDecomposition& b) {
    json j;
    json projections = json::array(), isometries = json::array(), actions = json::array(),
         states = json::array();
    for (const CMat& p : b.projections) projections.push_back(to_json(p));
    for (const CMat& v : b.isometries) isometries.push_back(to_json(v));
    for (const ClassicalAction& a : b.block_actions) actions.push_back(to_json(a));
    for (const CMat& s : b.block_fixed_states) states.push_back(to_json(s));
    j["projections"] = std::move(projections);
    j["isometries"] = std::move(isometries);
    j["per_block_actions"] = std::move(actions);
    j["per_block_fixed_states"] = std::move(states);
    return j;
}

json to_json(const FixedPointStructure& f) {
    json j;
    j["min_support"] = to_json(f.min_support);
    json centrals = json::array(), dims = json::array(), states = json::array(),
         isos = json::array();
    for (const CMat& p : f.central_projections) centrals.push_back(to_json(p));
    for (auto [k, r] : f.factor_dims) dims.push_back(json::array({k, r}));
    for (const CMat& s : f.block_states) states.push_back(to_json(s));
    for (const CMat& v : f.factor_isometries) isos.push_back(to_json(v));
    j["central_projections"] = std::move(centrals);
    j["factor_dims"] = std::move(dims);
    j["block_states"] = std::move(states);
    j["factor_isometries"] = std::move(isos);
    return j;
}

json load_json_file(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw SchemaError(file, "cannot open file");
    json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(file, std::string("parse error: ") + e.what());
    }
    return j;
}

void write_json_file(const std::string& file, const json& j) {
    std::ofstream out(file);
    if (!out) throw SchemaError(file, "cannot open file for writing");
    out << j.dump(2) << "\n";
}

std::string detect_payload_kind(const json& j) {
    if (!j.is_object()) throw SchemaError("$", "expected a JSON object");
    if (j.contains("kraus")) return "cpmap";
    if (j.contains("operations")) return "instrument";
    if (j.contains("effects")) return "observable";
    if (j.contains("interaction")) return "process";
    throw SchemaError("$", "unrecognised payload (expected cpmap/instrument/observable/process)");
}

} // namespace qoptk
