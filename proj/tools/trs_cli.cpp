// Command-line front end. Talks to the engine only through the C API.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "trs/trs.h"

namespace {

int report_failure(const char* what) {
  std::cerr << "trs: " << what << ": " << trs_last_error_code() << ": "
            << trs_last_error_message() << "\n";
  return 1;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw CLI::ValidationError("--config", "cannot read " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

const char* category_name(trs_category c) {
  switch (c) {
    case TRS_POSITIVE:
      return "Positive";
    case TRS_NEGATIVE:
      return "Negative";
    case TRS_MITIGATED:
      return "Mitigated";
    case TRS_CONTRADICTORY:
      return "Contradictory";
  }
  return "?";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trust-reputation engine for e-commerce reviews"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(trs_version()));

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Run an agent scenario");
  std::string config_path;
  std::string out_path = "-";
  std::string format = "table";
  simulate->add_option("--config", config_path, "Scenario JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  simulate->add_option("--out", out_path, "Report file ('-' for stdout)");
  simulate->add_option("--format", format, "Report format")
      ->check(CLI::IsMember({"json", "csv", "table"}));

  // serve
  auto* serve = app.add_subcommand("serve", "Run the HTTP/JSON service");
  std::string listen = "127.0.0.1:8080";
  std::string journal;
  std::string lexicon;
  int64_t ttl = 86400;
  int default_k = 6;
  bool test_mode = false;
  serve->add_option("--listen", listen, "host:port")->envname("TRS_LISTEN");
  serve->add_option("--journal", journal, "Journal file (empty: in memory)")
      ->envname("TRS_JOURNAL");
  serve->add_option("--lexicon", lexicon, "Lexicon file (empty: built-in)")
      ->envname("TRS_LEXICON");
  serve->add_option("--blacklist-ttl", ttl, "Blacklist duration in seconds")
      ->envname("TRS_BLACKLIST_TTL")
      ->check(CLI::PositiveNumber);
  serve->add_option("--default-k", default_k, "Default selection size")
      ->envname("TRS_DEFAULT_K")
      ->check(CLI::Range(4, 10));
  serve->add_flag("--test-mode", test_mode,
                  "Take request time from the X-Now header")
      ->envname("TRS_TEST_MODE");

  // classify
  auto* classify = app.add_subcommand("classify", "Classify a feedback text");
  std::string text;
  std::string classify_lexicon;
  classify->add_option("text", text, "Feedback text")->required();
  classify->add_option("--lexicon", classify_lexicon, "Lexicon file");

  // adjust
  auto* adjust =
      app.add_subcommand("adjust", "Trust change for one like/dislike");
  double feedtrust = 0.0;
  std::string choice;
  adjust->add_option("trustworthiness", feedtrust, "Feedback trustworthiness")
      ->required();
  adjust->add_option("choice", choice, "like or dislike")
      ->required()
      ->check(CLI::IsMember({"like", "dislike"}));

  CLI11_PARSE(app, argc, argv);

  if (*simulate) {
    const auto config = read_file(config_path);
    char* out = nullptr;
    if (trs_simulate(config.c_str(), format.c_str(), &out) != TRS_OK) {
      return report_failure("simulate");
    }
    std::string report(out);
    trs_string_free(out);
    if (out_path == "-") {
      std::cout << report;
    } else {
      std::ofstream file(out_path, std::ios::binary);
      file << report;
      if (!file) {
        std::cerr << "trs: cannot write " << out_path << "\n";
        return 1;
      }
    }
    return 0;
  }

  if (*serve) {
    const auto colon = listen.rfind(':');
    if (colon == std::string::npos) {
      std::cerr << "trs: --listen expects host:port\n";
      return 2;
    }
    const std::string host = listen.substr(0, colon);
    const int port = std::stoi(listen.substr(colon + 1));
    trs_engine_options opts{journal.empty() ? nullptr : journal.c_str(),
                            lexicon.empty() ? nullptr : lexicon.c_str(), ttl,
                            default_k};
    trs_engine* engine = nullptr;
    if (trs_engine_open(&opts, &engine) != TRS_OK) {
      return report_failure("open");
    }
    std::cerr << "trs: listening on " << host << ":" << port
              << (test_mode ? " (test mode)" : "") << "\n";
    trs_serve_options serve_opts{host.c_str(), port, test_mode ? 1 : 0};
    const auto status = trs_serve(engine, &serve_opts);
    trs_engine_close(engine);
    return status == TRS_OK ? 0 : report_failure("serve");
  }

  if (*classify) {
    trs_engine* engine = nullptr;
    if (!classify_lexicon.empty()) {
      trs_engine_options opts{nullptr, classify_lexicon.c_str(), 0, 0};
      if (trs_engine_open(&opts, &engine) != TRS_OK) {
        return report_failure("open");
      }
    }
    trs_category category{};
    double polarity = 0.0;
    const auto status = trs_classify(engine, text.c_str(), &category, &polarity);
    trs_engine_close(engine);
    if (status != TRS_OK) {
      return report_failure("classify");
    }
    std::printf("%s %.6g\n", category_name(category), polarity);
    return 0;
  }

  if (*adjust) {
    trs_adjustment_kind kind{};
    double amount = 0.0;
    if (trs_trust_adjustment(feedtrust, choice == "like" ? TRS_LIKE : TRS_DISLIKE,
                             &kind, &amount) != TRS_OK) {
      return report_failure("adjust");
    }
    std::printf("%s %+g\n", kind == TRS_ADJUST_DELTA ? "delta" : "override",
                amount);
    return 0;
  }
  return 0;
}
