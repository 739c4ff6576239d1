#include "rtj/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "rtj/analysis.hpp"
#include "rtj/baseline.hpp"
#include "rtj/boolean.hpp"
#include "rtj/engine.hpp"
#include "rtj/loader.hpp"
#include "rtj/parser.hpp"
#include "rtj/planner.hpp"
#include "rtj/relmodel.hpp"

namespace rtj {

namespace {

using nlohmann::json;

struct RunOptions {
  std::string engine = "rtj";
  std::string bit_order = "lsb";
  std::string alpha;
  std::string order;
  unsigned width = 0;
  std::string stats_path;
  bool trace = false;
  bool verify_bound = false;
  bool explain = false;
  unsigned jobs = 1;
  std::string query_inline;
  std::vector<std::string> inputs;
};

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<std::uint32_t> permutation_of(const std::vector<std::string>& names,
                                          const std::vector<std::string>& vars,
                                          const std::string& flag) {
  if (names.size() != vars.size())
    throw usage_error(flag + " must list each query variable exactly once");
  std::vector<std::uint32_t> perm;
  std::vector<bool> used(vars.size(), false);
  for (const auto& name : names) {
    auto it = std::find(vars.begin(), vars.end(), name);
    if (it == vars.end()) throw usage_error(flag + ": unknown variable " + name);
    std::size_t idx = static_cast<std::size_t>(it - vars.begin());
    if (used[idx]) throw usage_error(flag + ": variable " + name + " repeated");
    used[idx] = true;
    perm.push_back(static_cast<std::uint32_t>(idx));
  }
  return perm;
}

json plan_to_json(const ExpansionPlan& plan, const BooleanQuery& bq) {
  json groups = json::array();
  for (const auto& group : plan.groups) {
    json g = json::array();
    for (auto id : group) g.push_back(bq.bool_var_name(id));
    groups.push_back(g);
  }
  json schedules = json::array();
  for (std::size_t a = 0; a < plan.schedules.size(); ++a) {
    const auto& sched = plan.schedules[a];
    json order = json::array();
    for (const auto& [attr, bit] : sched.order.positions)
      order.push_back(std::to_string(attr) + "." + std::to_string(bit));
    json descents = json::array();
    for (const auto& [b, e] : sched.ranges) descents.push_back(e - b);
    schedules.push_back({{"atom", a},
                         {"relation", bq.atoms[a].relation},
                         {"index_order", order},
                         {"descents_per_level", descents}});
  }
  return {{"k", plan.group_count()},
          {"p", plan.max_group_size()},
          {"groups", groups},
          {"schedules", schedules}};
}

void write_stats(const std::string& path, const json& stats) {
  std::ofstream out(path);
  if (!out) throw usage_error("cannot write stats file " + path);
  out << stats.dump(2) << "\n";
}

void print_rows(std::ostream& out, const ResultSet& rows, const std::vector<ColumnType>& types,
                const Database& db) {
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << "\t";
      if (c < types.size() && types[c] == ColumnType::text && row[c] < db.dictionary.size())
        out << db.dictionary[row[c]];
      else
        out << row[c];
    }
    out << "\n";
  }
}

int do_run(const RunOptions& opt, std::istream& in, std::ostream& out, std::ostream& err) {
  // Input resolution: explicit query text/file first, else the bundle's.
  std::optional<std::string> query_text;
  std::vector<std::string> data_paths = opt.inputs;
  if (!opt.query_inline.empty()) {
    query_text = opt.query_inline;
  } else if (!data_paths.empty() && data_paths.front() != "-") {
    std::ifstream qf(data_paths.front());
    if (!qf) throw usage_error("cannot open query file " + data_paths.front());
    std::stringstream buf;
    buf << qf.rdbuf();
    query_text = buf.str();
    data_paths.erase(data_paths.begin());
  }

  Database db;
  if (data_paths.empty() || (data_paths.size() == 1 && data_paths.front() == "-")) {
    LoadedBundle bundle = load_bundle(in);
    db = std::move(bundle.db);
    if (!query_text) query_text = bundle.query_text;
  } else {
    db = load_database(data_paths);
  }
  if (!query_text) throw usage_error("no query given (file, --query, or bundle)");

  ParsedQuery parsed = parse_query(*query_text);
  ConjunctiveQuery bound = bind_query(parsed, db);
  ConjunctiveQuery q = normalize_query(bound);
  std::vector<ColumnType> head_types = head_column_types(parsed, db);

  unsigned width = opt.width ? opt.width : compute_width(db.universe_size);
  if (width < compute_width(db.universe_size))
    throw usage_error("--width too small for the universe");
  EncodingSpec spec(width, opt.bit_order == "msb" ? BitIndexConvention::msb_at_0
                                                  : BitIndexConvention::lsb_at_0);

  std::vector<std::string> free_vars = q.free_vars();
  if (!opt.order.empty() && opt.engine != "grtj" && opt.engine != "lftj")
    throw usage_error("--order applies to the grtj and lftj engines only");
  if (!opt.alpha.empty() && (opt.engine == "lftj" || opt.engine == "brute" || opt.engine == "pairwise"))
    throw usage_error("--alpha applies to the rtj and grtj engines only");
  if (!opt.alpha.empty() && !opt.order.empty())
    throw usage_error("--alpha and --order conflict; give one");
  if (opt.verify_bound && opt.engine != "rtj" && opt.engine != "grtj")
    throw usage_error("--verify-bound applies to the rtj and grtj engines only");
  if ((opt.trace || opt.explain) && opt.engine != "rtj" && opt.engine != "grtj")
    throw usage_error("--trace/--explain apply to the rtj and grtj engines only");

  json stats_json;
  stats_json["engine"] = opt.engine;
  ResultSet results;

  if (opt.engine == "brute") {
    auto t0 = std::chrono::steady_clock::now();
    results = brute_force_join(q, db);
    stats_json["wall_time_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    stats_json["solutions"] = results.size();
  } else if (opt.engine == "pairwise") {
    auto t0 = std::chrono::steady_clock::now();
    results = pairwise_hash_join(q, db);
    stats_json["wall_time_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    stats_json["solutions"] = results.size();
  } else if (opt.engine == "lftj") {
    std::vector<std::string> order =
        opt.order.empty() ? free_vars : split_csv(opt.order);
    auto t0 = std::chrono::steady_clock::now();
    auto [rows, probes] = lftj(q, db, order);
    stats_json["wall_time_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    results = std::move(rows);
    stats_json["solutions"] = results.size();
    stats_json["bindings_attempted"] = probes.bindings;
    stats_json["seeks"] = probes.seeks;
  } else if (opt.engine == "grtj" || opt.engine == "rtj") {
    EngineOptions eopts;
    eopts.jobs = opt.jobs;
    if (opt.trace) eopts.trace = &out;

    JoinResult run;
    if (opt.engine == "grtj") {
      std::string order_flag = !opt.order.empty() ? opt.order : opt.alpha;
      std::vector<std::uint32_t> alpha;
      if (order_flag.empty()) {
        alpha.resize(free_vars.size());
        std::iota(alpha.begin(), alpha.end(), 0);
      } else {
        alpha = permutation_of(split_csv(order_flag), free_vars,
                               opt.order.empty() ? "--alpha" : "--order");
      }
      VariableOrder vorder = interleaved_variable_order(free_vars.size(), width, alpha);
      if (opt.explain) {
        BooleanQuery bq = booleanise_query(q, spec);
        out << describe_plan(plan_for_variable_order(bq, vorder), bq);
        return 0;
      }
      run = run_grtj(q, db, spec, vorder, eopts);
    } else {
      std::vector<std::uint32_t> rank;
      if (!opt.alpha.empty()) {
        auto alpha = permutation_of(split_csv(opt.alpha), free_vars, "--alpha");
        rank.resize(alpha.size());
        for (std::uint32_t pos = 0; pos < alpha.size(); ++pos) rank[alpha[pos]] = pos;
      }
      IndexedDatabase idb = index_database(db, spec);
      if (opt.explain) {
        BooleanQuery bq = booleanise_query(q, spec);
        out << describe_plan(plan_for_query(bq, idb.orders, rank), bq);
        return 0;
      }
      run = run_rtj(q, idb, rank, eopts);
    }

    results = run.results;
    stats_json["solutions"] = run.stats.solutions;
    stats_json["wall_time_seconds"] = run.stats.wall_seconds;
    stats_json["nodes_per_level"] = run.stats.nodes_per_level;
    stats_json["candidates_per_level"] = run.stats.candidates_per_level;
    stats_json["total_candidates"] = run.stats.total_candidates();
    stats_json["plan"] = plan_to_json(run.plan, run.bq);

    if (opt.verify_bound) {
      SubquerySizeProfile profile = subquery_profile(run.bq, db, run.plan);
      BoundReport report = verify_instance_bound(run.stats, profile, run.plan);
      if (!report.ok) {
        err << "instance bound violated: " << report.first_mismatch << "\n";
        if (!opt.stats_path.empty()) write_stats(opt.stats_path, stats_json);
        return 2;
      }
      err << "instance bound verified: " << report.total_candidates
          << " candidate checks across " << run.plan.group_count() << " levels\n";
    }
  } else {
    throw usage_error("unknown engine " + opt.engine);
  }

  if (!opt.stats_path.empty()) write_stats(opt.stats_path, stats_json);
  print_rows(out, results, head_types, db);
  return 0;
}

std::string query_text_for(GeneratedInstance inst) {
  // The grammar has no 0-ary heads: a fully specified partial match turns its
  // last constant into a variable pinned by an equality constraint.
  if (inst.query.head_vars.empty()) {
    Atom& atom = inst.query.atoms.front();
    Term& last = atom.args.back();
    inst.query.constraints.push_back({"x", CompareOp::eq, last.value});
    last = Term::make_var("x");
    inst.query.head_vars = {"x"};
  }
  ParsedQuery pq;
  pq.head_name = "Q";
  pq.head_vars = inst.query.head_vars;
  for (const auto& atom : inst.query.atoms) {
    SurfaceAtom sa;
    sa.predicate = atom.predicate;
    for (const auto& term : atom.args) {
      SurfaceTerm st;
      if (term.is_var()) {
        st.kind = SurfaceTerm::Kind::variable;
        st.text = term.var;
      } else {
        st.kind = SurfaceTerm::Kind::number;
        st.number = term.value;
      }
      sa.args.push_back(st);
    }
    pq.atoms.push_back(std::move(sa));
  }
  for (const auto& c : inst.query.constraints) {
    SurfaceTerm lit;
    lit.kind = SurfaceTerm::Kind::number;
    lit.number = c.bound;
    pq.constraints.push_back({c.var, c.op, lit});
  }
  return print_query(pq);
}

int do_gen(const GeneratedInstance& inst, const std::string& out_dir, std::ostream& out) {
  std::string query = query_text_for(inst);
  if (out_dir.empty()) {
    write_bundle(out, inst.db, query);
    return 0;
  }
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  {
    std::ofstream qf(fs::path(out_dir) / "query.dl");
    qf << query << "\n";
  }
  for (const auto& [name, rel] : inst.db.relations) {
    std::ofstream rf(fs::path(out_dir) / (name + ".tsv"));
    write_tsv(rf, inst.db, name);
  }
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"worst-case optimal multi-way joins over bitwise tries"};
  app.require_subcommand(1);

  RunOptions ropt;
  CLI::App* run = app.add_subcommand("run", "answer a query");
  run->add_option("--engine", ropt.engine, "rtj|grtj|lftj|brute|pairwise")
      ->check(CLI::IsMember({"rtj", "grtj", "lftj", "brute", "pairwise"}));
  run->add_option("--bit-order", ropt.bit_order, "bit index convention (lsb|msb)")
      ->check(CLI::IsMember({"lsb", "msb"}));
  run->add_option("--alpha", ropt.alpha, "comma-separated variable permutation");
  run->add_option("--order", ropt.order, "variable order for grtj/lftj");
  run->add_option("--width", ropt.width, "encoding width override");
  run->add_option("--stats", ropt.stats_path, "write stats JSON here");
  run->add_flag("--trace", ropt.trace, "per-node event stream on stdout");
  run->add_flag("--verify-bound", ropt.verify_bound, "check node counts against the oracle");
  run->add_flag("--explain", ropt.explain, "print the expansion plan and exit");
  run->add_option("--jobs", ropt.jobs, "parallel workers for the root level");
  run->add_option("--query", ropt.query_inline, "inline query text");
  run->add_option("inputs", ropt.inputs, "query file then TSV files/dirs ('-' for stdin bundle)");

  std::string gen_out_dir;
  std::uint64_t grid_side = 4, pair_count = 10, bern_tuples = 1024, bern_seed = 1;
  std::size_t bern_arity = 2, bern_specified = 1;
  CLI::App* gen = app.add_subcommand("gen", "emit a generated instance");
  gen->require_subcommand(1);
  CLI::App* gen_grid = gen->add_subcommand("grid", "triangle query over a full q x q grid");
  gen_grid->add_option("--q-side", grid_side, "grid side length");
  CLI::App* gen_pairs = gen->add_subcommand("pairs", "disjoint pairs with Q(x) :- R(x,x)");
  gen_pairs->add_option("--count", pair_count, "number of pairs");
  CLI::App* gen_bern = gen->add_subcommand("bernoulli", "uniform random partial-match instance");
  gen_bern->add_option("--tuples", bern_tuples, "relation size");
  gen_bern->add_option("--arity", bern_arity, "relation arity");
  gen_bern->add_option("--specified", bern_specified, "leading constant positions");
  gen_bern->add_option("--seed", bern_seed, "rng seed");
  for (CLI::App* sub : {gen_grid, gen_pairs, gen_bern})
    sub->add_option("--out", gen_out_dir, "write query.dl and *.tsv into this directory");

  std::vector<std::string> argv(args.rbegin(), args.rend());  // CLI11 wants a reversed vector
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << e.what() << "\n";
    return 1;
  }

  try {
    if (run->parsed()) return do_run(ropt, in, out, err);
    if (gen_grid->parsed()) return do_gen(gen_agm_grid(grid_side), gen_out_dir, out);
    if (gen_pairs->parsed()) return do_gen(gen_pathological_pairs(pair_count), gen_out_dir, out);
    if (gen_bern->parsed())
      return do_gen(gen_bernoulli_relation(bern_tuples, bern_arity, bern_specified, bern_seed),
                    gen_out_dir, out);
    err << "no subcommand\n";
    return 1;
  } catch (const parse_error& e) {
    err << "query parse error at " << e.what() << "\n";
    return 1;
  } catch (const size_guard_error& e) {
    err << "size guard: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace rtj
