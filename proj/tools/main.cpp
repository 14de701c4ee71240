// Command-line front end: solve, verify, density, sequence, analyze.
// Exit codes: 0 success, 1 verification failure, 2 input error.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "batchclear/analysis.hpp"
#include "batchclear/errors.hpp"
#include "batchclear/io.hpp"
#include "batchclear/rational_extract.hpp"
#include "batchclear/sequencer.hpp"
#include "batchclear/solver_convex.hpp"
#include "batchclear/solver_reference.hpp"
#include "batchclear/solver_tatonnement.hpp"
#include "batchclear/verifier.hpp"

namespace {

using namespace batchclear;

int cmd_solve(const std::string& path, const std::string& solver, double tol,
              const std::string& diag_path, bool rational) {
    auto inst = load_instance(path);
    auto issues = validate_instance(inst);
    for (const auto& is : issues) {
        if (!is.warning) {
            std::cerr << "invalid instance: " << is.code << " (participant " << is.participant
                      << "): " << is.detail << "\n";
            return 2;
        }
        std::cerr << "warning: " << is.detail << "\n";
    }

    std::ofstream diag;
    if (!diag_path.empty()) {
        diag.open(diag_path);
        diag << "iter,objective,grad_norm\n";
    }
    auto sink = [&](long it, double obj, double gn) {
        if (diag.is_open()) diag << it << "," << obj << "," << gn << "\n";
    };

    batch_solution sol;
    if (solver == "reference") {
        sol = solve_two_asset(inst).solution;
    } else if (solver == "tatonnement") {
        tatonnement_options o;
        if (!diag_path.empty()) o.diag = sink;
        sol = solve_tatonnement(inst, o);
    } else {
        solve_options o;
        if (tol > 0.0) o.tol = std::min(o.tol, tol * tol);
        if (!diag_path.empty()) o.diag = sink;
        sol = solve_convex(inst, o).solution;
    }
    const double vtol = tol > 0.0 ? tol : 1e-5;
    sol.verifier_report = verify_solution(inst, sol, vtol);

    rational_solution exact;
    if (rational) {
        exact = extract_rational(inst, sol.prices);
        if (exact.status != rational_status::ok)
            std::cerr << "rational extraction: " << exact.detail << "\n";
    }
    std::cout << solution_to_json(inst, sol, rational ? &exact : nullptr) << "\n";
    return all_pass(sol.verifier_report) && sol.status != solve_status::no_equilibrium_found ? 0 : 1;
}

int cmd_verify(const std::string& inst_path, const std::string& sol_path, double tol) {
    auto inst = load_instance(inst_path);
    auto sol = load_solution(inst, sol_path);
    auto report = verify_solution(inst, sol, tol);
    report.push_back(check_nobeyond(inst, sol));
    std::cout << render_report_table(report);
    return all_pass(report) ? 0 : 1;
}

int cmd_density(const std::string& inst_path, const std::string& cfmm_id, const std::string& out) {
    auto inst = load_instance(inst_path);
    auto csv = density_csv(inst, cfmm_id);
    if (out.empty() || out == "-") {
        std::cout << csv;
    } else {
        std::ofstream f(out);
        if (!f) throw parse_error("cannot write " + out);
        f << csv;
    }
    return 0;
}

int cmd_sequence(const std::string& path, bool fee_deposit) {
    auto batches = load_sequence(path);
    sequence_options opts;
    opts.carry_fee_deposit = fee_deposit;
    if (!batches.empty() && batches.front().asset_count() != 2) opts.solver = sequence_solver::convex;
    auto result = run_sequence(batches, opts);
    bool ok = true;
    std::cout << "[\n";
    for (size_t i = 0; i < result.solutions.size(); ++i) {
        std::cout << solution_to_json(batches[i], result.solutions[i]);
        std::cout << (i + 1 < result.solutions.size() ? ",\n" : "\n");
        ok = ok && all_pass(result.solutions[i].verifier_report);
    }
    std::cout << "]\n";
    std::cerr << "batch,rate\n";
    for (size_t i = 0; i < result.clearing_rates.size(); ++i)
        std::cerr << i << "," << result.clearing_rates[i] << "\n";
    return ok ? 0 : 1;
}

int cmd_analyze(const std::string& path, const std::string& probe) {
    auto inst = load_instance(path);
    bool ok = true;
    if (probe == "rule-family") {
        auto v = family_identity_check();
        std::cout << "rule-family: " << (v.pass ? "pass" : "FAIL") << " - " << v.detail << "\n";
        return v.pass ? 0 : 1;
    }
    for (size_t i = 0; i < inst.participants.size(); ++i) {
        const auto* c = std::get_if<cfmm_decl>(&inst.participants[i]);
        if (!c) continue;
        const std::string name = c->id.empty() ? "cfmm#" + std::to_string(i) : c->id;
        probe_verdict v;
        if (probe == "wgs")
            v = wgs_probe(c->fn, c->reserves);
        else if (probe == "budget")
            v = budget_invariance_probe(c->fn, c->reserves);
        else
            throw parse_error("unknown probe '" + probe + "'");
        std::cout << name << " " << probe << ": " << (v.pass ? "pass" : "FAIL") << " - " << v.detail
                  << "\n";
        if (v.witness && !v.pass) {
            std::cout << "  witness prices:";
            for (double x : v.witness->prices) std::cout << " " << x;
            std::cout << " -> raised asset " << v.witness->raised_asset << ", demand for asset "
                      << v.witness->decreased_asset << " moved " << v.witness->before << " -> "
                      << v.witness->after << "\n";
        }
        ok = ok && v.pass;
    }
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"batch-exchange clearing engine"};
    app.require_subcommand(1);

    std::string inst_path, sol_path, solver = "convex", diag, cfmm_id, out = "-", probe = "wgs";
    double tol = 0.0;
    bool rational = false, fee_deposit = false;

    auto* solve = app.add_subcommand("solve", "clear one batch instance");
    solve->add_option("instance", inst_path)->required();
    solve->add_option("--solver", solver)->check(CLI::IsMember({"convex", "tatonnement", "reference"}));
    solve->add_option("--tol", tol);
    solve->add_option("--diag", diag);
    solve->add_flag("--rational", rational);

    auto* verify = app.add_subcommand("verify", "check a solution against the axiom suite");
    verify->add_option("instance", inst_path)->required();
    verify->add_option("solution", sol_path)->required();
    double vtol = 1e-8;
    verify->add_option("--tol", vtol);

    auto* density = app.add_subcommand("density", "export a CFMM's sale densities as CSV");
    density->add_option("instance", inst_path)->required();
    density->add_option("--cfmm", cfmm_id)->required();
    density->add_option("--out", out);

    auto* sequence = app.add_subcommand("sequence", "run a list of batches carrying CFMM state");
    sequence->add_option("sequence", inst_path)->required();
    sequence->add_flag("--fee-deposit", fee_deposit);

    auto* analyze = app.add_subcommand("analyze", "probe instance CFMMs for WGS/budget properties");
    analyze->add_option("instance", inst_path)->required();
    analyze->add_option("--probe", probe)->check(CLI::IsMember({"wgs", "budget", "rule-family"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) return cmd_solve(inst_path, solver, tol, diag, rational);
        if (verify->parsed()) return cmd_verify(inst_path, sol_path, vtol);
        if (density->parsed()) return cmd_density(inst_path, cfmm_id, out);
        if (sequence->parsed()) return cmd_sequence(inst_path, fee_deposit);
        if (analyze->parsed()) return cmd_analyze(inst_path, probe);
    } catch (const batchclear::parse_error& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const batchclear::error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
