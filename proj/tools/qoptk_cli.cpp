// qoptk — command-line front end: JSON interchange, bundled generators, batch
// classification, dilation construction, and audit reporting.
//
// Exit codes: 0 success, 1 domain error (structured error JSON emitted),
// 2 I/O or schema error.

#include <atomic>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "qoptk/generators.hpp"
#include "qoptk/json_io.hpp"

using namespace qoptk;
namespace fs = std::filesystem;

namespace {

std::string timestamp_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

struct Options {
    std::vector<std::string> inputs;
    std::string output;
    std::uint64_t seed = 20240901;
    int max_iter = 10000;
    int parallel = 1;
    Tolerances tol;

    ScalingConfig scaling() const {
        ScalingConfig cfg;
        cfg.tol = tol;
        cfg.max_iter = max_iter;
        cfg.seed = seed;
        return cfg;
    }
};

void add_common(CLI::App* cmd, Options& opt, bool needs_input) {
    auto* in = cmd->add_option("--input", opt.inputs, "input JSON file(s)");
    if (needs_input) in->required();
    cmd->add_option("--output", opt.output, "output path (directory in batch mode)")->required();
    cmd->add_option("--seed", opt.seed, "random seed");
    cmd->add_option("--max-iter", opt.max_iter, "scaling iteration cap");
    cmd->add_option("--ds-eps", opt.tol.ds_eps, "scaling epsilon (converged when DS <= eps^2)");
    cmd->add_option("--parallel", opt.parallel, "worker threads for batch inputs");
    cmd->add_option("--tol-herm", opt.tol.herm_tol, "hermiticity tolerance");
    cmd->add_option("--tol-psd", opt.tol.psd_tol, "positivity tolerance");
    cmd->add_option("--tol-trace", opt.tol.trace_tol, "trace tolerance");
    cmd->add_option("--tol-proj", opt.tol.proj_tol, "projection tolerance");
    cmd->add_option("--tol-span", opt.tol.span_tol, "span tolerance");
    cmd->add_option("--tol-rank", opt.tol.rank_tol, "relative rank threshold");
    cmd->add_option("--tol-fixed", opt.tol.fixed_tol, "fixed-point tolerance");
    cmd->add_option("--tol-eff", opt.tol.eff_tol, "effect tolerance");
}

json report_header(const std::string& command, const std::string& input, const Options& opt) {
    json j;
    j["command"] = command;
    if (!input.empty()) j["input"] = input;
    j["seed"] = opt.seed;
    j["tolerances"] = to_json(opt.tol);
    j["timestamp"] = timestamp_utc();
    return j;
}

json run_classify_map(const json& payload, const Options& opt) {
    CPMap m = cpmap_from_json(payload, "$");
    json rep;
    rep["map_classification"] = to_json(classify_map(m, opt.tol));
    if (m.is_square()) {
        HierarchyVerdict v = is_trace_preserving(m, opt.tol.trace_tol)
                                 ? channel_hierarchy(m, opt.scaling())
                                 : operation_hierarchy(m, opt.scaling());
        rep["hierarchy"] = to_json(v);
        rep["tiers"] = json::array(
            {to_string(v.class_I), to_string(v.class_II), to_string(v.class_III)});
    }
    return rep;
}

json run_classify_instrument(const json& payload, const Options& opt) {
    Instrument inst = instrument_from_json(payload, "$");
    validate_instrument(inst, opt.tol);
    json rep;
    Observable obs = compatible_observable(inst, opt.tol);
    rep["observable"] = to_json(obs);
    rep["observable_class"] = to_json(classify_observable(obs, opt.tol));

    std::vector<HierarchyVerdict> verdicts;
    json per_op = json::array();
    for (const CPMap& op : inst.operations) {
        verdicts.push_back(operation_hierarchy(op, opt.scaling()));
        per_op.push_back(to_json(verdicts.back()));
    }
    HierarchyVerdict channel_v = channel_hierarchy(total_channel(inst), opt.scaling());
    rep["operation_verdicts"] = std::move(per_op);
    rep["channel_verdict"] = to_json(channel_v);
    rep["instrument_tiers"] = to_json(instrument_tiers(inst, verdicts, channel_v, opt.tol));

    DisturbanceReport dist = disturbance_report(inst, opt.tol);
    dist.nogo_conflicts = nogo_audit(inst, verdicts, channel_v, dist, opt.tol);
    rep["disturbance"] = to_json(dist);
    return rep;
}

json run_audit(const json& payload, const Options& opt) {
    Instrument inst = instrument_from_json(payload, "$");
    validate_instrument(inst, opt.tol);
    std::vector<HierarchyVerdict> verdicts;
    for (const CPMap& op : inst.operations)
        verdicts.push_back(operation_hierarchy(op, opt.scaling()));
    HierarchyVerdict channel_v = channel_hierarchy(total_channel(inst), opt.scaling());
    DisturbanceReport dist = disturbance_report(inst, opt.tol);
    dist.nogo_conflicts = nogo_audit(inst, verdicts, channel_v, dist, opt.tol);
    json rep;
    rep["observable_class"] =
        to_json(classify_observable(compatible_observable(inst, opt.tol), opt.tol));
    rep["instrument_tiers"] =
        to_json(instrument_tiers(inst, verdicts, channel_v, opt.tol));
    rep["disturbance"] = to_json(dist);
    rep["conflicts"] = dist.nogo_conflicts;
    return rep;
}

json run_dilate(const json& payload, const Options& opt, const std::string& kind) {
    Instrument inst = instrument_from_json(payload, "$");
    validate_instrument(inst, opt.tol);
    MeasurementProcess p = (kind == "strong") ? dilate_strong_third(inst, opt.scaling())
                                              : dilate_weak_third(inst, opt.tol);
    json rep;
    rep["kind"] = kind;
    rep["process"] = to_json(p);
    rep["class_report"] = to_json(validate_process_class(p, opt.scaling()));
    Instrument back = induced_instrument(p, opt.tol);
    double residual = 0.0;
    for (std::size_t x = 0; x < inst.operations.size(); ++x)
        residual = std::max(residual,
                            max_abs_diff(choi(back.operations[x]), choi(inst.operations[x])));
    rep["round_trip_residual"] = residual;
    return rep;
}

json run_decompose(const json& payload, const Options& opt) {
    CPMap ch = cpmap_from_json(payload, "$");
    json rep;
    rep["minimal_support"] = to_json(minimal_support_projection(ch, opt.tol));
    rep["fixed_point_dimension"] = fixed_point_basis(ch, opt.tol).span_dimension();
    rep["block_decomposition"] = to_json(kraus_block_decomposition(ch, opt.tol, opt.seed));
    rep["fixed_algebra"] = to_json(fixed_algebra_decomposition(ch, opt.tol, opt.seed));
    std::string diag;
    if (auto rho = strictly_positive_fixed_state(ch, nullptr, opt.tol, opt.seed, &diag)) {
        rep["strictly_positive_fixed_state"] = to_json(*rho);
    } else {
        rep["strictly_positive_fixed_state"] = nullptr;
        rep["fixed_state_diagnostics"] = diag;
    }
    return rep;
}

struct DemoOptions {
    std::string name;
    int d = 2;
    int outcomes = 2;
    double lambda = 0.5;
    std::string which = "hadamard";
    std::vector<double> diag_entries;
    std::vector<double> xi_entries;
};

CMat diag_from(const std::vector<double>& entries) {
    CMat m(int(entries.size()), int(entries.size()));
    for (std::size_t i = 0; i < entries.size(); ++i) m(int(i), int(i)) = entries[i];
    return m;
}

json run_demo(const DemoOptions& dopt, const Options& opt) {
    const std::string& name = dopt.name;
    if (name == "identity") return to_json(identity_map(dopt.d));
    if (name == "unitary") {
        if (dopt.which == "hadamard") return to_json(gen::unitary_channel(gen::hadamard()));
        if (dopt.which == "pauli_x") return to_json(gen::unitary_channel(gen::pauli_x()));
        if (dopt.which == "pauli_z") return to_json(gen::unitary_channel(gen::pauli_z()));
        if (dopt.which == "random")
            return to_json(gen::unitary_channel(Rng(opt.seed).haar_unitary(dopt.d)));
        throw UnknownGenerator("unitary kind '" + dopt.which + "'");
    }
    if (name == "luders") {
        if (dopt.diag_entries.empty())
            throw UnknownGenerator("luders needs --diag with effect eigenvalues");
        return to_json(gen::luders_operation(diag_from(dopt.diag_entries), opt.tol));
    }
    if (name == "prepare") {
        CMat sigma = dopt.diag_entries.empty() ? Rng(opt.seed).density(dopt.d, dopt.d)
                                               : diag_from(dopt.diag_entries);
        return to_json(gen::prepare_channel(sigma));
    }
    if (name == "swap_process") {
        if (dopt.diag_entries.empty() || dopt.xi_entries.empty())
            throw UnknownGenerator("swap_process needs --diag (effect) and --xi-diag (state)");
        return to_json(swap_process(diag_from(dopt.diag_entries), diag_from(dopt.xi_entries),
                                    opt.tol));
    }
    if (name == "depolarize_to_pure")
        return to_json(gen::depolarize_to_pure(dopt.lambda, basis_ket(dopt.d, 0)));
    if (name == "qutrit_remark_instrument") return to_json(gen::qutrit_remark_instrument());
    if (name == "rank_drop_d3") return to_json(gen::rank_drop_d3());
    if (name == "random_channel")
        return to_json(gen::random_channel(dopt.d, dopt.d, opt.seed));
    if (name == "random_bistochastic")
        return to_json(gen::random_bistochastic(dopt.d, dopt.d, opt.seed));
    if (name == "random_instrument")
        return to_json(gen::random_instrument(dopt.d, dopt.outcomes, opt.seed));
    throw UnknownGenerator("'" + name + "' (see demo --list)");
}

int process_one(const std::string& command, const std::string& input,
                const std::string& output, const Options& opt, const std::string& kind) {
    json rep = report_header(command, input, opt);
    try {
        json payload = load_json_file(input);
        if (command == "classify-map")
            rep["report"] = run_classify_map(payload, opt);
        else if (command == "classify-instrument")
            rep["report"] = run_classify_instrument(payload, opt);
        else if (command == "audit")
            rep["report"] = run_audit(payload, opt);
        else if (command == "dilate")
            rep["report"] = run_dilate(payload, opt, kind);
        else if (command == "decompose")
            rep["report"] = run_decompose(payload, opt);
    } catch (const SchemaError& e) {
        rep["error"] = {{"kind", "schema"}, {"message", e.what()}, {"path", e.field_path}};
        write_json_file(output, rep);
        return 2;
    } catch (const Error& e) {
        rep["error"] = {{"kind", "domain"}, {"message", e.what()}};
        write_json_file(output, rep);
        return 1;
    }
    write_json_file(output, rep);
    return 0;
}

int run_command(const std::string& command, Options& opt, const std::string& kind) {
    if (opt.inputs.size() == 1) {
        return process_one(command, opt.inputs.front(), opt.output, opt, kind);
    }
    // batch mode: output is a directory, inputs fan out over workers
    fs::create_directories(opt.output);
    std::atomic<std::size_t> next{0};
    std::atomic<int> worst{0};
    const int workers = std::max(1, std::min<int>(opt.parallel, int(opt.inputs.size())));
    auto work = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= opt.inputs.size()) return;
            const fs::path in(opt.inputs[i]);
            const fs::path out = fs::path(opt.output) / (in.stem().string() + ".report.json");
            const int rc = process_one(command, in.string(), out.string(), opt, kind);
            int cur = worst.load();
            while (rc > cur && !worst.compare_exchange_weak(cur, rc)) {
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
    return worst.load();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"quantum operations analysis toolkit"};
    app.require_subcommand(1);

    Options opt;
    DemoOptions dopt;
    std::string dilate_kind = "weak";
    bool demo_list = false;

    CLI::App* classify_map_cmd =
        app.add_subcommand("classify-map", "classify a CP map against the hierarchy");
    add_common(classify_map_cmd, opt, true);
    CLI::App* classify_inst_cmd = app.add_subcommand(
        "classify-instrument", "classify an instrument with disturbance audit");
    add_common(classify_inst_cmd, opt, true);
    CLI::App* audit_cmd = app.add_subcommand("audit", "disturbance and no-go audit");
    add_common(audit_cmd, opt, true);
    CLI::App* dilate_cmd = app.add_subcommand("dilate", "construct a measurement process");
    add_common(dilate_cmd, opt, true);
    dilate_cmd->add_option("--kind", dilate_kind, "weak | strong")
        ->check(CLI::IsMember({"weak", "strong"}));
    CLI::App* decompose_cmd =
        app.add_subcommand("decompose", "fixed-point and block structure of a channel");
    add_common(decompose_cmd, opt, true);

    CLI::App* demo_cmd = app.add_subcommand("demo", "write a bundled example object");
    demo_cmd->add_option("--name", dopt.name, "generator name");
    demo_cmd->add_flag("--list", demo_list, "list generators");
    demo_cmd->add_option("--output", opt.output, "output JSON file");
    demo_cmd->add_option("--seed", opt.seed, "random seed");
    demo_cmd->add_option("--d", dopt.d, "dimension");
    demo_cmd->add_option("--outcomes", dopt.outcomes, "outcome count");
    demo_cmd->add_option("--lambda", dopt.lambda, "mixing weight");
    demo_cmd->add_option("--which", dopt.which, "named unitary (hadamard|pauli_x|pauli_z|random)");
    demo_cmd->add_option("--diag", dopt.diag_entries, "diagonal entries for effects/states");
    demo_cmd->add_option("--xi-diag", dopt.xi_entries, "diagonal entries for the swap state");

    CLI11_PARSE(app, argc, argv);

    try {
        if (demo_cmd->parsed()) {
            if (demo_list) {
                for (const std::string& n : gen::generator_names()) std::cout << n << "\n";
                return 0;
            }
            if (dopt.name.empty() || opt.output.empty()) {
                std::cerr << "demo needs --name and --output (or --list)\n";
                return 2;
            }
            write_json_file(opt.output, run_demo(dopt, opt));
            return 0;
        }
        for (CLI::App* cmd : {classify_map_cmd, classify_inst_cmd, audit_cmd, decompose_cmd})
            if (cmd->parsed()) return run_command(cmd->get_name(), opt, dilate_kind);
        if (dilate_cmd->parsed()) return run_command("dilate", opt, dilate_kind);
    } catch (const SchemaError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const UnknownGenerator& e) {
        std::cerr << "UnknownGenerator: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
    return 0;
}
