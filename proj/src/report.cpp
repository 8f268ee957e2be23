#include "volrank/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <json.hpp>
#include <set>

#include "volrank/csv.hpp"

namespace volrank {

namespace {

std::string path_in(const std::string& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  return (std::filesystem::path(dir) / name).string();
}

std::vector<int> report_windows(const TauReport& report) {
  std::set<int> qs;
  for (const auto& id : report.scheme_ids) {
    if (id) qs.insert(id->q);
  }
  return {qs.begin(), qs.end()};
}

}  // namespace

std::string format_tau(double v) {
  if (std::isnan(v)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  // Avoid "-0.000000" flipping byte comparisons.
  if (std::string_view(buf) == "-0.000000") return "0.000000";
  return buf;
}

void write_mean_tau_tables(const std::string& dir, const TauReport& report) {
  const std::vector<int> qs = report_windows(report);
  for (std::size_t b = 0; b < report.subsets.size(); ++b) {
    auto out = csv::open_out(path_in(dir, "mean_tau_" + report.subsets[b].name + ".csv"));
    out << "approach,variance_model";
    for (int q : qs) out << ",q" << q;
    out << '\n';
    for (Approach a : {Approach::direct, Approach::factor}) {
      for (VarianceModel v : {VarianceModel::naive, VarianceModel::garch}) {
        bool any = false;
        std::string row = std::string(to_string(a)) + "," + std::string(to_string(v));
        for (int q : qs) {
          const SchemeId id{a, v, q};
          std::string cell = "NA";
          for (std::size_t s = 0; s < report.scheme_ids.size(); ++s) {
            if (report.scheme_ids[s] && *report.scheme_ids[s] == id) {
              cell = format_tau(report.mean[b][s].mean);
              any = true;
            }
          }
          row += "," + cell;
        }
        if (any) out << row << '\n';
      }
    }
  }
}

void write_tau_series(const std::string& dir, const TauReport& report) {
  for (std::size_t b = 0; b < report.subsets.size(); ++b) {
    auto out = csv::open_out(path_in(dir, "tau_series_" + report.subsets[b].name + ".csv"));
    out << "period,approach,variance_model,q,tau\n";
    for (std::size_t t = 0; t < report.periods.size(); ++t) {
      for (std::size_t s = 0; s < report.scheme_ids.size(); ++s) {
        if (!report.scheme_ids[s]) continue;
        const SchemeId& id = *report.scheme_ids[s];
        const auto& tau = report.per_period[b][s][t];
        out << format_month(report.periods[t]) << ',' << to_string(id.approach) << ','
            << to_string(id.variance_model) << ',' << id.q << ','
            << (tau ? format_tau(*tau) : std::string("NA")) << '\n';
      }
    }
  }
}

void write_summary(const std::string& dir, const TauReport& report) {
  nlohmann::ordered_json j;
  j["periods"] = report.periods.size();
  j["first_period"] = report.periods.empty() ? "" : format_month(report.periods.front());
  j["last_period"] = report.periods.empty() ? "" : format_month(report.periods.back());
  j["original_portfolios"] = report.original_portfolios;
  j["random_portfolios"] = report.random_portfolios;
  j["skipped_portfolios"] = report.skipped_portfolios;
  j["garch_fallbacks"] = report.garch_fallbacks;
  j["repaired_windows"] = report.repaired_windows;
  j["schemes"] = report.scheme_names;
  nlohmann::ordered_json subsets = nlohmann::ordered_json::array();
  for (std::size_t b = 0; b < report.subsets.size(); ++b) {
    nlohmann::ordered_json s;
    s["name"] = report.subsets[b].name;
    s["sizes"] = report.subset_sizes[b];
    nlohmann::ordered_json cells = nlohmann::ordered_json::object();
    for (std::size_t k = 0; k < report.scheme_names.size(); ++k) {
      const TauCell& c = report.mean[b][k];
      nlohmann::ordered_json cell;
      cell["mean_tau"] = std::isnan(c.mean) ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(c.mean);
      cell["periods_used"] = c.periods_used;
      cell["periods_undefined"] = c.periods_undefined;
      cells[report.scheme_names[k]] = cell;
    }
    s["schemes"] = cells;
    subsets.push_back(s);
  }
  j["subsets"] = subsets;
  j["log"] = report.log;
  auto out = csv::open_out(path_in(dir, "summary.json"));
  out << j.dump(2) << '\n';
}

void write_estimates(const std::string& dir, const TauReport& report) {
  auto out = csv::open_out(path_in(dir, "estimates.csv"));
  out << "portfolio,period,scheme,q,estimate\n";
  for (const auto& rec : report.details) {
    const std::string period = format_month(rec.start);
    for (std::size_t i = 0; i < rec.portfolios.size(); ++i) {
      const std::string& id = rec.portfolios[i].id;
      out << id << ',' << period << ",target,," << csv::format_double(rec.targets[i]) << '\n';
      for (std::size_t s = 0; s < report.scheme_names.size(); ++s) {
        if (report.scheme_ids[s]) {
          const SchemeId& sid = *report.scheme_ids[s];
          out << id << ',' << period << ',' << to_string(sid.approach) << '-' << to_string(sid.variance_model)
              << ',' << sid.q;
        } else {
          out << id << ',' << period << ',' << report.scheme_names[s] << ',';
        }
        out << ',' << csv::format_double(rec.estimates[s][i]) << '\n';
      }
    }
  }
}

void write_garch_diagnostics(const std::string& dir, const TauReport& report) {
  auto out = csv::open_out(path_in(dir, "garch_diagnostics.csv"));
  out << "series,period,mu,omega,alpha,beta,status\n";
  for (const auto& rec : report.details) {
    const std::string period = format_month(rec.start);
    for (const auto& [name, fit] : rec.garch_fits) {
      out << name << ',' << period << ',' << csv::format_double(fit.mu) << ',' << csv::format_double(fit.omega)
          << ',' << csv::format_double(fit.alpha) << ',' << csv::format_double(fit.beta) << ','
          << to_string(fit.status) << '\n';
    }
  }
}

}  // namespace volrank
