// linkintent: intent-aware microblog retrieval and annotation analytics.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "linkintent/annotations.hpp"
#include "linkintent/codebook.hpp"
#include "linkintent/config.hpp"
#include "linkintent/corpus.hpp"
#include "linkintent/eval.hpp"
#include "linkintent/index.hpp"
#include "linkintent/intent.hpp"
#include "linkintent/rerank.hpp"
#include "linkintent/taxonomy.hpp"
#include "linkintent/version.hpp"

namespace fs = std::filesystem;
using namespace linkintent;

namespace {

// Output files are written to a temp sibling and renamed into place.
void atomic_write(const std::string& path, std::string_view content) {
  fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  write_file(tmp.string(), content);
  fs::rename(tmp, target);
}

void require_exists(const std::string& path, const std::string& what) {
  if (path.empty()) throw ValidationError("missing required path: " + what);
  if (!fs::exists(path)) throw IoError(what + " not found: " + path);
}

std::string pick(const std::string& flag_value, const std::string& config_value) {
  return flag_value.empty() ? config_value : flag_value;
}

Taxonomy load_taxonomy_checked(const std::string& path) {
  require_exists(path, "taxonomy file");
  return Taxonomy::load(path);
}

Corpus load_corpus_checked(const std::string& path, size_t* rejected = nullptr) {
  require_exists(path, "corpus file");
  auto result = ingest_file(path);
  for (const auto& issue : result.issues)
    std::cerr << "warning: " << path << ":" << issue.line << ": " << issue.message << "\n";
  if (rejected) *rejected = result.issues.size();
  return std::move(result.corpus);
}

std::string distribution_tsv(const DistributionTable& table) {
  std::ostringstream out;
  out << "group\tn";
  out << "\ttype:regular\ttype:replies\ttype:quoted";
  for (auto l : kLengthBucketLabels) out << "\tlen:" << l;
  for (auto l : kReactionBucketLabels) out << "\treact:" << l;
  out << "\n";
  for (const auto& row : table.rows) {
    out << row.group << "\t" << row.count;
    for (double v : row.type_pct) out << "\t" << format_double(v, 4);
    for (double v : row.length_pct) out << "\t" << format_double(v, 4);
    for (double v : row.reaction_pct) out << "\t" << format_double(v, 4);
    out << "\n";
  }
  return out.str();
}

void print_distribution(const DistributionTable& table) {
  auto block = [&](const std::string& title, const std::vector<std::string_view>& cols,
                   auto accessor) {
    std::printf("%s\n", title.c_str());
    std::printf("%-10s %6s", "group", "n");
    for (auto c : cols) {
      // Pad by display width; bucket labels contain multi-byte dashes.
      int pad = 9 - static_cast<int>(utf8_length(c));
      std::printf(" %*s%.*s", pad > 0 ? pad : 0, "", static_cast<int>(c.size()), c.data());
    }
    std::printf("\n");
    for (const auto& row : table.rows) {
      std::printf("%-10s %6zu", row.group.c_str(), row.count);
      for (size_t i = 0; i < cols.size(); ++i) std::printf(" %8.1f%%", accessor(row, i));
      std::printf("\n");
    }
    std::printf("\n");
  };
  block("intentions vs. tweet type", {"Regular", "Replies", "Quoted"},
        [](const DistributionRow& r, size_t i) { return r.type_pct[i]; });
  block("intentions vs. tweet length",
        {kLengthBucketLabels.begin(), kLengthBucketLabels.end()},
        [](const DistributionRow& r, size_t i) { return r.length_pct[i]; });
  block("intentions vs. reactions count",
        {kReactionBucketLabels.begin(), kReactionBucketLabels.end()},
        [](const DistributionRow& r, size_t i) { return r.reaction_pct[i]; });
}

// Drops tweet labels for records without URLs; such records carry no
// URL-sharing intent.
size_t prune_urlless_labels(LabelStore& store, const Corpus& corpus) {
  size_t dropped = 0;
  for (auto it = store.tweet_labels.begin(); it != store.tweet_labels.end();) {
    const auto* rec = corpus.find(it->first);
    if (rec && !rec->has_url()) {
      it = store.tweet_labels.erase(it);
      ++dropped;
    } else {
      ++it;
    }
  }
  return dropped;
}

struct RunSpec {
  std::string name;
  std::string path;
};

RunSpec parse_run_spec(const std::string& arg) {
  auto eq = arg.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == arg.size())
    throw ValidationError("run must be name=path, got \"" + arg + "\"");
  return {arg.substr(0, eq), arg.substr(eq + 1)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"intent-aware microblog retrieval and URL-intent annotation analytics"};
  app.set_version_flag("--version", LINKINTENT_VERSION);
  app.require_subcommand(1);

  // Config file: --config beats LINKINTENT_CONFIG beats built-in defaults.
  std::string config_path;
  if (const char* env = std::getenv("LINKINTENT_CONFIG")) config_path = env;
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--config") config_path = argv[i + 1];
  }
  RunConfig cfg;
  if (!config_path.empty()) {
    require_exists(config_path, "config file");
    cfg = RunConfig::load(config_path);
  }
  app.add_option("--config", config_path, "run configuration file")->expected(1);

  int exit_code = 0;

  // --- taxonomy ------------------------------------------------------------
  auto* tax_cmd = app.add_subcommand("taxonomy", "validate the taxonomy or map prior labels");
  tax_cmd->require_subcommand(1);
  struct {
    std::string taxonomy, mapping, source, label;
  } tax_opt;
  auto* tax_validate = tax_cmd->add_subcommand("validate", "check the taxonomy file");
  tax_validate->add_option("--taxonomy", tax_opt.taxonomy, "taxonomy file");
  tax_validate->callback([&] {
    Taxonomy tax = load_taxonomy_checked(pick(tax_opt.taxonomy, cfg.taxonomy_path));
    std::printf("%zu categories / %zu classes\n", tax.categories().size(), tax.class_count());
    for (const auto& cat : tax.categories())
      std::printf("  %-10s %-35s %zu classes\n", cat.id.c_str(), cat.name.c_str(),
                  cat.classes.size());
  });
  auto* tax_map = tax_cmd->add_subcommand("map", "map a prior-taxonomy label");
  tax_map->add_option("--taxonomy", tax_opt.taxonomy, "taxonomy file");
  tax_map->add_option("--mapping", tax_opt.mapping, "mapping table file");
  tax_map->add_option("--source", tax_opt.source, "prior taxonomy source")->required();
  tax_map->add_option("--label", tax_opt.label, "source label text")->required();
  tax_map->callback([&] {
    Taxonomy tax = load_taxonomy_checked(pick(tax_opt.taxonomy, cfg.taxonomy_path));
    std::string mapping = pick(tax_opt.mapping, cfg.mapping_path);
    require_exists(mapping, "mapping file");
    auto table = PriorMappingTable::load(mapping, tax);
    for (const auto& cat : table.map_prior(parse_prior_source(tax_opt.source), tax_opt.label))
      std::printf("%s\n", cat.c_str());
  });

  // --- ingest ----------------------------------------------------------------
  auto* ingest_cmd = app.add_subcommand("ingest", "validate a corpus file");
  struct {
    std::string corpus, out, report;
  } ingest_opt;
  ingest_cmd->add_option("--corpus", ingest_opt.corpus, "line-delimited record file");
  ingest_cmd->add_option("--out", ingest_opt.out, "write normalized records here");
  ingest_cmd->add_option("--report", ingest_opt.report, "write rejected-line report here");
  ingest_cmd->callback([&] {
    std::string path = pick(ingest_opt.corpus, cfg.corpus_path);
    require_exists(path, "corpus file");
    auto result = ingest_file(path);
    std::printf("ingested %zu records, rejected %zu\n", result.corpus.size(),
                result.issues.size());
    for (const auto& issue : result.issues)
      std::fprintf(stderr, "warning: line %zu: %s\n", issue.line, issue.message.c_str());
    if (!ingest_opt.out.empty()) atomic_write(ingest_opt.out, result.corpus.serialize());
    if (!ingest_opt.report.empty()) {
      std::ostringstream rep;
      rep << "line\tmessage\n";
      for (const auto& issue : result.issues) rep << issue.line << "\t" << issue.message << "\n";
      atomic_write(ingest_opt.report, rep.str());
    }
  });

  // --- stats -----------------------------------------------------------------
  auto* stats_cmd = app.add_subcommand("stats", "property distributions per intent group");
  struct {
    std::string corpus, labels, taxonomy, out;
  } stats_opt;
  stats_cmd->add_option("--corpus", stats_opt.corpus, "corpus file");
  stats_cmd->add_option("--labels", stats_opt.labels, "tweet label file (tweet_id<TAB>label)");
  stats_cmd->add_option("--taxonomy", stats_opt.taxonomy, "taxonomy file");
  stats_cmd->add_option("--out", stats_opt.out, "write TSV table here");
  stats_cmd->callback([&] {
    Corpus corpus = load_corpus_checked(pick(stats_opt.corpus, cfg.corpus_path));
    DistributionTable table;
    std::string labels_path = pick(stats_opt.labels, cfg.tweet_labels_path);
    if (!labels_path.empty()) {
      require_exists(labels_path, "label file");
      Taxonomy tax = load_taxonomy_checked(pick(stats_opt.taxonomy, cfg.taxonomy_path));
      auto labels = parse_tweet_labels(read_file(labels_path), tax);
      table = corpus_stats(corpus, labels, tax);
    } else {
      table = corpus_stats(corpus);
    }
    print_distribution(table);
    if (!stats_opt.out.empty()) atomic_write(stats_opt.out, distribution_tsv(table));
  });

  // --- consensus ---------------------------------------------------------------
  auto* consensus_cmd = app.add_subcommand("consensus", "per-item consensus outcomes");
  struct {
    std::string labels, taxonomy, out, label_out;
  } cons_opt;
  consensus_cmd->add_option("--labels", cons_opt.labels, "annotation file")->required();
  consensus_cmd->add_option("--taxonomy", cons_opt.taxonomy, "taxonomy file");
  consensus_cmd->add_option("--out", cons_opt.out, "write per-item outcomes TSV here");
  consensus_cmd->add_option("--label-out", cons_opt.label_out,
                            "write consensus tweet labels here (NC-UN items become uncertain)");
  consensus_cmd->callback([&] {
    Taxonomy tax = load_taxonomy_checked(pick(cons_opt.taxonomy, cfg.taxonomy_path));
    require_exists(cons_opt.labels, "annotation file");
    auto sets = load_annotations(cons_opt.labels, tax);
    auto outcomes = consensus_outcomes(sets);
    auto dist = intention_distribution(outcomes);
    std::ostringstream tsv;
    tsv << "item_id\toutcome\tlabel\tnc_un\n";
    for (const auto& [id, out] : outcomes) {
      tsv << id << "\t" << to_string(out.kind) << "\t"
          << (out.label ? out.label->key() : "") << "\t" << (out.is_nc_un ? 1 : 0) << "\n";
    }
    std::printf("%zu items\n", outcomes.size());
    std::printf("intention distribution:\n");
    for (const auto& [key, pct] : dist.percent)
      std::printf("  %-28s %6.1f%%\n", key.c_str(), pct);
    std::printf("NC-UN: %.1f%%\n", dist.nc_un_percent);
    std::printf("NC-UN items:");
    bool any = false;
    for (const auto& [id, out] : outcomes) {
      if (out.is_nc_un) {
        std::printf(" %s", id.c_str());
        any = true;
      }
    }
    std::printf(any ? "\n" : " none\n");
    if (!cons_opt.out.empty()) atomic_write(cons_opt.out, tsv.str());
    if (!cons_opt.label_out.empty()) {
      std::ostringstream labels;
      for (const auto& [id, out] : outcomes) {
        if (out.is_nc_un)
          labels << id << "\tuncertain\n";
        else if (out.label)
          labels << id << "\t" << out.label->key() << "\n";
      }
      atomic_write(cons_opt.label_out, labels.str());
    }
  });

  // --- agreement -----------------------------------------------------------------
  auto* agree_cmd = app.add_subcommand("agreement", "inter-annotator agreement statistics");
  struct {
    std::string labels, taxonomy, before, after, expert, crowd, out;
  } agree_opt;
  agree_cmd->add_option("--labels", agree_opt.labels, "annotation file (Fleiss)");
  agree_cmd->add_option("--before", agree_opt.before, "annotation file before intervention");
  agree_cmd->add_option("--after", agree_opt.after, "annotation file after intervention");
  agree_cmd->add_option("--expert", agree_opt.expert, "single-rater label file (Cohen)");
  agree_cmd->add_option("--crowd", agree_opt.crowd, "single-rater label file (Cohen)");
  agree_cmd->add_option("--taxonomy", agree_opt.taxonomy, "taxonomy file");
  agree_cmd->add_option("--out", agree_opt.out, "write machine-readable report here");
  agree_cmd->callback([&] {
    Taxonomy tax = load_taxonomy_checked(pick(agree_opt.taxonomy, cfg.taxonomy_path));
    std::ostringstream rep;
    if (!agree_opt.labels.empty()) {
      require_exists(agree_opt.labels, "annotation file");
      auto sets = load_annotations(agree_opt.labels, tax);
      auto report = agreement_report(sets);
      std::string kappa = report.fleiss ? format_double(*report.fleiss, 4) : "undefined";
      std::printf("items: %zu  raters: %d  categories: %zu\n", report.n_items, report.n_raters,
                  report.n_categories);
      std::printf("fleiss_kappa: %s (%s)\n", kappa.c_str(),
                  report.interpretation_band.c_str());
      rep << "n_items\t" << report.n_items << "\n"
          << "n_raters\t" << report.n_raters << "\n"
          << "n_categories\t" << report.n_categories << "\n"
          << "fleiss_kappa\t" << kappa << "\n"
          << "band\t" << report.interpretation_band << "\n";
      if (!report.outcome_histogram.empty()) {
        std::printf("outcomes:\n");
        for (const auto& [kind, n] : report.outcome_histogram) {
          std::printf("  %-22s %zu\n", to_string(kind).c_str(), n);
          rep << "outcome:" << to_string(kind) << "\t" << n << "\n";
        }
        std::printf("  %-22s %zu\n", "nc_un", report.nc_un_count);
        rep << "nc_un\t" << report.nc_un_count << "\n";
      }
    }
    if (!agree_opt.before.empty() || !agree_opt.after.empty()) {
      require_exists(agree_opt.before, "before annotation file");
      require_exists(agree_opt.after, "after annotation file");
      auto before = consensus_outcomes(load_annotations(agree_opt.before, tax));
      auto after = consensus_outcomes(load_annotations(agree_opt.after, tax));
      auto delta = agreement_delta(before, after);
      std::printf("items: %zu, NC-UN before: %zu, gained majority: %.1f%%\n", delta.n_items,
                  delta.n_before_nc_un, delta.gained_majority_percent);
      rep << "delta_items\t" << delta.n_items << "\n"
          << "delta_nc_un_before\t" << delta.n_before_nc_un << "\n"
          << "delta_gained_majority_pct\t" << format_double(delta.gained_majority_percent, 4)
          << "\n";
      for (const auto& t : delta.transitions)
        rep << "transition\t" << t.item_id << "\t" << to_string(t.before) << "\t"
            << to_string(t.after) << "\t" << (t.gained_majority ? 1 : 0) << "\n";
    }
    if (!agree_opt.expert.empty() || !agree_opt.crowd.empty()) {
      require_exists(agree_opt.expert, "expert label file");
      require_exists(agree_opt.crowd, "crowd label file");
      auto a = parse_tweet_labels(read_file(agree_opt.expert), tax);
      auto b = parse_tweet_labels(read_file(agree_opt.crowd), tax);
      std::vector<IntentLabel> seq_a, seq_b;
      for (const auto& [id, label] : a) {
        auto it = b.find(id);
        if (it == b.end())
          throw ValidationError("item " + id + " missing from crowd label file");
        seq_a.push_back(label);
        seq_b.push_back(it->second);
      }
      for (const auto& [id, label] : b) {
        if (!a.count(id)) throw ValidationError("item " + id + " missing from expert label file");
      }
      auto kappa = cohens_kappa(seq_a, seq_b);
      std::string text = kappa ? format_double(*kappa, 4) : "undefined";
      std::printf("cohen_kappa: %s (%s), items: %zu\n", text.c_str(),
                  kappa_band(kappa).c_str(), seq_a.size());
      rep << "cohen_kappa\t" << text << "\n"
          << "cohen_items\t" << seq_a.size() << "\n";
    }
    if (rep.str().empty())
      throw ValidationError("agreement needs --labels, --before/--after, or --expert/--crowd");
    if (!agree_opt.out.empty()) atomic_write(agree_opt.out, rep.str());
  });

  // --- codebook -------------------------------------------------------------------
  auto* code_cmd = app.add_subcommand("codebook", "intention-code dedup and affinity grouping");
  code_cmd->require_subcommand(1);
  struct {
    std::string codes, groupings, out;
    int threshold = 0;
  } code_opt;
  auto* code_dedupe = code_cmd->add_subcommand("dedupe", "collapse exact duplicate codes");
  code_dedupe->add_option("--codes", code_opt.codes, "codes file")->required();
  code_dedupe->add_option("--out", code_opt.out, "write surviving codes here");
  code_dedupe->callback([&] {
    require_exists(code_opt.codes, "codes file");
    auto codes = load_codes(code_opt.codes);
    auto result = dedupe_exact(codes);
    std::printf("%zu codes in, %zu kept, %zu merged\n", codes.size(), result.codes.size(),
                codes.size() - result.codes.size());
    if (!code_opt.out.empty()) {
      std::ostringstream out;
      for (const auto& c : result.codes) out << c.id << "\t" << c.text << "\n";
      atomic_write(code_opt.out, out.str());
    }
  });
  auto* code_merge = code_cmd->add_subcommand("merge", "merge codes flagged identical");
  code_merge->add_option("--groupings", code_opt.groupings, "worker groupings file")->required();
  code_merge->add_option("--threshold", code_opt.threshold, "votes needed (default: majority)");
  code_merge->add_option("--out", code_opt.out, "write merged classes here");
  code_merge->callback([&] {
    require_exists(code_opt.groupings, "groupings file");
    auto groupings = load_groupings(code_opt.groupings);
    auto result = consensus_merge(groupings, code_opt.threshold > 0
                                                 ? std::optional<int>(code_opt.threshold)
                                                 : std::nullopt);
    std::printf("%zu classes, %zu codes discarded by similarity\n", result.classes.size(),
                result.discarded);
    if (!code_opt.out.empty()) {
      std::ostringstream out;
      for (const auto& cls : result.classes) {
        for (size_t i = 0; i < cls.size(); ++i) out << (i ? " " : "") << cls[i];
        out << "\n";
      }
      atomic_write(code_opt.out, out.str());
    }
  });
  auto* code_group = code_cmd->add_subcommand("group", "majority-vote affinity grouping");
  code_group->add_option("--groupings", code_opt.groupings, "worker groupings file")->required();
  code_group->add_option("--threshold", code_opt.threshold, "votes needed (default: majority)");
  code_group->add_option("--out", code_opt.out, "write consensus groups here");
  code_group->callback([&] {
    require_exists(code_opt.groupings, "groupings file");
    auto groupings = load_groupings(code_opt.groupings);
    auto groups = consensus_grouping(groupings, code_opt.threshold > 0
                                                    ? std::optional<int>(code_opt.threshold)
                                                    : std::nullopt);
    std::printf("%zu consensus groups\n", groups.size());
    std::ostringstream out;
    for (const auto& g : groups) {
      out << g.name << "\t";
      for (size_t i = 0; i < g.members.size(); ++i) out << (i ? " " : "") << g.members[i];
      out << "\n";
    }
    std::fputs(out.str().c_str(), stdout);
    if (!code_opt.out.empty()) atomic_write(code_opt.out, out.str());
  });

  // --- index ------------------------------------------------------------------------
  auto* index_cmd = app.add_subcommand("index", "build an inverted index snapshot");
  struct {
    std::string corpus, out;
    bool include_linked = false;
  } index_opt;
  index_cmd->add_option("--corpus", index_opt.corpus, "corpus file");
  index_cmd->add_option("--out", index_opt.out, "snapshot path")->required();
  index_cmd->add_flag("--include-linked", index_opt.include_linked,
                      "index linked-document title and body too");
  index_cmd->callback([&] {
    Corpus corpus = load_corpus_checked(pick(index_opt.corpus, cfg.corpus_path));
    auto idx =
        InvertedIndex::build(corpus, Tokenizer{}, IndexOptions{index_opt.include_linked});
    atomic_write(index_opt.out, idx.serialize());
    std::printf("indexed %zu docs, %zu terms, avgdl %.2f\n", idx.n_docs(), idx.n_terms(),
                idx.avg_doc_len());
  });

  // --- search -----------------------------------------------------------------------
  auto* search_cmd = app.add_subcommand("search", "BM25 top-k retrieval");
  struct {
    std::string corpus, index, topics, query, topic_id = "Q1", tag = "bm25", out;
    size_t k = 0;
    double k1 = -1, b = -1;
  } search_opt;
  search_cmd->add_option("--corpus", search_opt.corpus, "corpus file");
  search_cmd->add_option("--index", search_opt.index, "index snapshot");
  search_cmd->add_option("--topics", search_opt.topics, "topic file");
  search_cmd->add_option("--query", search_opt.query, "single ad-hoc query");
  search_cmd->add_option("--topic-id", search_opt.topic_id, "topic id for --query");
  search_cmd->add_option("--k", search_opt.k, "retrieval depth (default 50)");
  search_cmd->add_option("--k1", search_opt.k1, "BM25 k1");
  search_cmd->add_option("--b", search_opt.b, "BM25 b");
  search_cmd->add_option("--tag", search_opt.tag, "run tag");
  search_cmd->add_option("--out", search_opt.out, "run file output");
  search_cmd->callback([&] {
    InvertedIndex idx;
    if (!search_opt.index.empty()) {
      require_exists(search_opt.index, "index snapshot");
      idx = InvertedIndex::load(search_opt.index);
    } else {
      Corpus corpus = load_corpus_checked(pick(search_opt.corpus, cfg.corpus_path));
      idx = InvertedIndex::build(corpus, Tokenizer{});
    }
    Bm25Params params = cfg.bm25;
    if (search_opt.k1 >= 0) params.k1 = search_opt.k1;
    if (search_opt.b >= 0) params.b = search_opt.b;
    const size_t k = search_opt.k ? search_opt.k : cfg.k;
    std::vector<Topic> topics;
    std::string topics_path = pick(search_opt.topics, cfg.topics_path);
    if (!search_opt.query.empty()) {
      topics.push_back(Topic{search_opt.topic_id, search_opt.query});
    } else {
      require_exists(topics_path, "topic file");
      topics = load_topics(topics_path);
    }
    RunFile run;
    run.tag = search_opt.tag;
    for (const auto& topic : topics) run.add(topic.id, idx.search_text(params, topic.title, k));
    std::printf("searched %zu topics (k=%zu)\n", topics.size(), k);
    if (!search_opt.out.empty()) atomic_write(search_opt.out, run.serialize());
    else std::fputs(run.serialize().c_str(), stdout);
  });

  // --- rerank -----------------------------------------------------------------------
  auto* rerank_cmd = app.add_subcommand("rerank", "intent-augmented BM25 rescoring");
  struct {
    std::string run, corpus, index, topics, taxonomy, tweet_labels, query_labels, scope;
    std::string tag = "bm25+intent", out;
    int repetition = 0;
  } rr_opt;
  rerank_cmd->add_option("--run", rr_opt.run, "baseline run file")->required();
  rerank_cmd->add_option("--corpus", rr_opt.corpus, "corpus file");
  rerank_cmd->add_option("--index", rr_opt.index, "index snapshot");
  rerank_cmd->add_option("--topics", rr_opt.topics, "topic file");
  rerank_cmd->add_option("--taxonomy", rr_opt.taxonomy, "taxonomy file");
  rerank_cmd->add_option("--tweet-labels", rr_opt.tweet_labels, "tweet label file");
  rerank_cmd->add_option("--query-labels", rr_opt.query_labels, "query label file");
  rerank_cmd->add_option("--stats-scope", rr_opt.scope, "mixed | candidate");
  rerank_cmd->add_option("--repetition", rr_opt.repetition, "intent text repetition factor");
  rerank_cmd->add_option("--tag", rr_opt.tag, "run tag");
  rerank_cmd->add_option("--out", rr_opt.out, "run file output")->required();
  rerank_cmd->callback([&] {
    Taxonomy tax = load_taxonomy_checked(pick(rr_opt.taxonomy, cfg.taxonomy_path));
    require_exists(rr_opt.run, "baseline run");
    RunFile baseline = RunFile::load(rr_opt.run);
    InvertedIndex idx;
    std::optional<Corpus> corpus;
    if (!rr_opt.index.empty()) {
      require_exists(rr_opt.index, "index snapshot");
      idx = InvertedIndex::load(rr_opt.index);
    } else {
      corpus = load_corpus_checked(pick(rr_opt.corpus, cfg.corpus_path));
      idx = InvertedIndex::build(*corpus, Tokenizer{});
    }
    std::string topics_path = pick(rr_opt.topics, cfg.topics_path);
    require_exists(topics_path, "topic file");
    auto topics = load_topics(topics_path);
    std::map<std::string, std::string> title_of;
    for (const auto& t : topics) title_of[t.id] = t.title;
    LabelStore store = load_labels(pick(rr_opt.tweet_labels, cfg.tweet_labels_path),
                                   pick(rr_opt.query_labels, cfg.query_labels_path), tax);
    if (corpus) {
      size_t dropped = prune_urlless_labels(store, *corpus);
      if (dropped)
        std::fprintf(stderr, "warning: %zu labels ignored for records without URLs\n", dropped);
    }
    RerankOptions options = cfg.rerank;
    if (!rr_opt.scope.empty()) options.scope = parse_stats_scope(rr_opt.scope);
    if (rr_opt.repetition > 0) options.repetition = rr_opt.repetition;
    RunFile out_run;
    out_run.tag = rr_opt.tag;
    size_t unlabeled_total = 0, unlabeled_queries = 0;
    for (const auto& [topic_id, candidates] : baseline.topics()) {
      auto title = title_of.find(topic_id);
      if (title == title_of.end())
        throw ValidationError("run topic " + topic_id + " missing from topic file");
      std::optional<IntentLabel> query_label;
      if (const auto* ql = store.query_label(topic_id)) query_label = ql->target;
      else ++unlabeled_queries;
      RerankReport report;
      out_run.add(topic_id, rerank(idx, cfg.bm25, title->second, query_label, candidates, store,
                                   tax, options, &report));
      unlabeled_total += report.unlabeled;
    }
    std::printf("reranked %zu topics (%s statistics)\n", baseline.topics().size(),
                to_string(options.scope).c_str());
    if (unlabeled_queries)
      std::fprintf(stderr, "warning: %zu topics had no query intent label\n", unlabeled_queries);
    if (unlabeled_total)
      std::fprintf(stderr, "warning: %zu candidates passed through unaugmented\n",
                   unlabeled_total);
    atomic_write(rr_opt.out, out_run.serialize());
  });

  // --- filter ------------------------------------------------------------------------
  auto* filter_cmd = app.add_subcommand("filter", "drop or demote intent-misaligned candidates");
  struct {
    std::string run, taxonomy, tweet_labels, query_labels, policy;
    std::string tag = "bm25+intent+filter", out;
  } flt_opt;
  filter_cmd->add_option("--run", flt_opt.run, "run file to filter")->required();
  filter_cmd->add_option("--taxonomy", flt_opt.taxonomy, "taxonomy file");
  filter_cmd->add_option("--tweet-labels", flt_opt.tweet_labels, "tweet label file");
  filter_cmd->add_option("--query-labels", flt_opt.query_labels, "query label file");
  filter_cmd->add_option("--policy", flt_opt.policy, "alignment policy file");
  filter_cmd->add_option("--tag", flt_opt.tag, "run tag");
  filter_cmd->add_option("--out", flt_opt.out, "run file output")->required();
  filter_cmd->callback([&] {
    Taxonomy tax = load_taxonomy_checked(pick(flt_opt.taxonomy, cfg.taxonomy_path));
    require_exists(flt_opt.run, "run file");
    RunFile input = RunFile::load(flt_opt.run);
    std::string policy_path = pick(flt_opt.policy, cfg.policy_path);
    require_exists(policy_path, "policy file");
    auto policy = AlignmentPolicy::load(policy_path, tax);
    LabelStore store = load_labels(pick(flt_opt.tweet_labels, cfg.tweet_labels_path),
                                   pick(flt_opt.query_labels, cfg.query_labels_path), tax);
    RunFile out_run;
    out_run.tag = flt_opt.tag;
    size_t dropped_total = 0, skipped_topics = 0;
    for (const auto& [topic_id, ranking] : input.topics()) {
      const auto* ql = store.query_label(topic_id);
      if (!ql) {
        ++skipped_topics;
        out_run.add(topic_id, ranking);
        continue;
      }
      FilterReport report;
      out_run.add(topic_id, filter_misaligned(policy, ql->facets, ranking, store, tax, &report));
      dropped_total += report.dropped;
    }
    std::printf("filtered %zu topics, dropped %zu candidates\n", input.topics().size(),
                dropped_total);
    if (skipped_topics)
      std::fprintf(stderr, "warning: %zu topics had no query facets; passed through\n",
                   skipped_topics);
    atomic_write(flt_opt.out, out_run.serialize());
  });

  // --- eval --------------------------------------------------------------------------
  auto* eval_cmd = app.add_subcommand("eval", "score runs against qrels");
  struct {
    std::string qrels, gain, out, per_topic;
    std::vector<std::string> runs;
    size_t k = 0;
  } eval_opt;
  eval_cmd->add_option("--qrels", eval_opt.qrels, "qrels file");
  eval_cmd->add_option("--run", eval_opt.runs, "run as name=path (repeatable)")->required();
  eval_cmd->add_option("--k", eval_opt.k, "nDCG cutoff (default 10)");
  eval_cmd->add_option("--gain", eval_opt.gain, "linear | exponential");
  eval_cmd->add_option("--out", eval_opt.out, "comparison TSV output");
  eval_cmd->add_option("--per-topic", eval_opt.per_topic, "per-topic TSV output");
  eval_cmd->callback([&] {
    std::string qrels_path = pick(eval_opt.qrels, cfg.qrels_path);
    require_exists(qrels_path, "qrels file");
    auto qrels = Qrels::load(qrels_path);
    std::vector<std::pair<std::string, RunFile>> loaded;
    for (const auto& arg : eval_opt.runs) {
      auto spec = parse_run_spec(arg);
      require_exists(spec.path, "run file " + spec.name);
      loaded.emplace_back(spec.name, RunFile::load(spec.path));
    }
    std::vector<std::pair<std::string, const RunFile*>> views;
    for (const auto& [name, run] : loaded) views.emplace_back(name, &run);
    const size_t k = eval_opt.k ? eval_opt.k : cfg.eval_k;
    GainVariant gain = eval_opt.gain.empty() ? cfg.gain : parse_gain(eval_opt.gain);
    auto cmp = evaluate_runs(views, qrels, k, gain);
    std::fputs(comparison_table(cmp).c_str(), stdout);
    for (const auto& row : cmp.rows) {
      if (!row.extra_topics.empty())
        std::fprintf(stderr, "warning: run %s has %zu unjudged topics\n", row.name.c_str(),
                     row.extra_topics.size());
      if (!row.zero_relevant_topics.empty())
        std::fprintf(stderr, "warning: %zu topics have no relevant docs\n",
                     row.zero_relevant_topics.size());
    }
    if (!eval_opt.out.empty()) atomic_write(eval_opt.out, comparison_tsv(cmp));
    if (!eval_opt.per_topic.empty()) {
      std::ostringstream pt;
      pt << "run\ttopic\tndcg@" << k << "\tap\n";
      for (const auto& [name, topics] : cmp.per_topic) {
        for (const auto& [topic, scores] : topics)
          pt << name << "\t" << topic << "\t" << format_double(scores.first, 4) << "\t"
             << format_double(scores.second, 4) << "\n";
      }
      atomic_write(eval_opt.per_topic, pt.str());
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    exit_code = 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    exit_code = 1;
  }
  return exit_code;
}
