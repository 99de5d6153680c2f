// Command-line driver for IETI-DP experiments.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ietidg/experiments.hpp"

namespace {

template <class T, class Parse>
std::vector<T> splitList(const std::string& text, Parse parse)
{
    std::vector<T> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(parse(item));
    if (out.empty()) throw std::invalid_argument("empty list '" + text + "'");
    return out;
}

std::vector<int> intList(const std::string& text, int min_value, const char* what)
{
    return splitList<int>(text, [&](const std::string& s) {
        std::size_t used = 0;
        const int v = std::stoi(s, &used);
        if (used != s.size() || v < min_value)
            throw std::invalid_argument(std::string("invalid ") + what + " '" + s + "'");
        return v;
    });
}

}  // namespace

int main(int argc, char** argv)
{
    using namespace ietidg;
    CLI::App app{"IETI-DP solver for multi-patch isogeometric SIPG discretizations of the Poisson problem"};

    std::string domain = "square-2x2", domain_file, write_domain, p_list = "2", r_list = "2", alg_list = "C",
                e_list = "0", format = "txt", out_path;
    ExperimentConfig base;
    bool timing = false, convergence = false;
    app.add_option("--domain", domain, "square-MxN, ring12 or footprint");
    app.add_option("--domain-file", domain_file, "read the domain from a text file instead");
    app.add_option("--write-domain", write_domain, "write the domain in text format and exit");
    app.add_option("--p", p_list, "spline degree(s), comma separated");
    app.add_option("--r", r_list, "refinement level(s), comma separated");
    app.add_option("--alg", alg_list, "primal constraints A, B or C, comma separated");
    app.add_option("--delta", base.delta, "penalty parameter")->capture_default_str();
    app.add_option("--disparity", e_list, "extra refinements of even patches, comma separated");
    app.add_option("--tol", base.tol, "relative residual tolerance")->capture_default_str();
    app.add_option("--max-iter", base.max_iter, "PCG iteration limit")->capture_default_str();
    app.add_option("--seed", base.seed, "seed of the random start vector")->capture_default_str();
    app.add_flag("--oracle", base.oracle, "compare with dense and monolithic oracles");
    app.add_flag("--preconditioned-residual", base.preconditioned_residual,
                 "stop on the preconditioned residual");
    app.add_option("--format", format, "txt or csv")->check(CLI::IsMember({"txt", "csv"}));
    app.add_option("--out", out_path, "output file (default stdout)");
    app.add_flag("--timing", timing, "report wall-clock seconds");
    app.add_flag("--convergence", convergence, "L2 convergence study of the manufactured solution over --r");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    std::vector<Algorithm> algs;
    std::vector<int> ps, rs, es;
    MultiPatchTopology topo = [&] {
        try {
            return domain_file.empty() ? makeDomain(domain) : readDomainFile(domain_file);
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << '\n';
            std::exit(1);
        }
    }();
    if (!domain_file.empty()) domain = domain_file;
    try {
        algs = splitList<Algorithm>(alg_list, parseAlgorithm);
        ps = intList(p_list, 1, "degree");
        rs = intList(r_list, 0, "refinement");
        es = intList(e_list, 0, "disparity");
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }

    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path);
        if (!file) {
            std::cerr << "error: cannot write " << out_path << '\n';
            return 1;
        }
    }
    std::ostream& out = out_path.empty() ? std::cout : file;

    if (!write_domain.empty()) {
        std::ofstream df(write_domain);
        if (!df) {
            std::cerr << "error: cannot write " << write_domain << '\n';
            return 1;
        }
        writeDomain(df, topo);
        return 0;
    }

    if (convergence) {
        int status = 0;
        for (Algorithm a : algs)
            for (int p : ps) {
                const ConvergenceStudy cs = convergenceStudy(topo, p, rs.front(), rs.back(), a, base.delta);
                for (std::size_t i = 0; i < cs.levels.size(); ++i) {
                    out << "alg " << toString(a) << " p " << p << " r " << cs.levels[i] << " L2 error " << cs.errors[i];
                    if (i > 0) out << " order " << cs.orders[i];
                    out << '\n';
                }
            }
        return status;
    }

    base.domain = domain;
    std::vector<ResultRow> rows;
    bool oracle_failed = false, not_converged = false;
    for (const ExperimentConfig& cfg : expandSweep(base, algs, es, rs, ps)) {
        try {
            rows.push_back(runExperiment(cfg, topo));
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << '\n';
            return 1;
        }
        const ResultRow& row = rows.back();
        not_converged = not_converged || !row.converged;
        if (row.oracle) {
            const OracleReport& o = *row.oracle;
            std::cerr << "oracle " << toString(cfg.alg) << " p=" << cfg.p << " r=" << cfg.r << " e=" << cfg.disparity
                      << ": dG difference " << o.dg_difference << (o.solution_ok ? " ok" : " FAIL")
                      << ", kappa lanczos " << o.kappa_lanczos << " dense " << o.kappa_dense
                      << (o.kappa_ok ? " ok" : " FAIL") << '\n';
            oracle_failed = oracle_failed || !o.passed();
        }
    }
    if (format == "csv")
        writeCsv(out, rows, timing);
    else
        writeTable(out, rows, timing);
    if (oracle_failed) return 2;
    if (not_converged) return 3;
    return 0;
}
