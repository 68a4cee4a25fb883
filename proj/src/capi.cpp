#include "szm/szm.h"

#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "szm/error.hpp"
#include "szm/estimators.hpp"
#include "szm/lscv.hpp"
#include "szm/models.hpp"
#include "szm/qmc.hpp"
#include "szm/simharness.hpp"
#include "szm/specialfn.hpp"
#include "szm/validation.hpp"

struct szm_sample {
  szm::Sample value;
};

struct szm_config {
  szm::ExperimentConfig value;
};

struct szm_selection {
  szm::LscvSelection value;
  std::vector<std::int64_t> m_star;
};

struct szm_points {
  std::size_t count;
  std::size_t dim;
  std::vector<double> data;
};

struct szm_checks {
  std::vector<szm::CheckRow> rows;
};

namespace {

thread_local std::string g_last_error;

szm_status fail(szm_status status, const char* what) {
  g_last_error = what;
  return status;
}

template <class F>
szm_status guarded(F&& body) {
  try {
    body();
    return SZM_OK;
  } catch (const szm::DomainError& e) {
    return fail(SZM_ERR_DOMAIN, e.what());
  } catch (const szm::UsageError& e) {
    return fail(SZM_ERR_USAGE, e.what());
  } catch (const szm::IoError& e) {
    return fail(SZM_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(SZM_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SZM_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(SZM_ERR_INTERNAL, "unknown error");
  }
}

void require(const void* p, const char* what) {
  if (p == nullptr) throw szm::UsageError(std::string(what) + " must not be null");
}

szm::SmoothingVector smoothing(const int64_t* m, std::size_t d) {
  require(m, "m");
  return szm::SmoothingVector(std::vector<std::int64_t>(m, m + d));
}

szm::EvaluationGrid grid_for(const szm::ExperimentConfig& c, std::size_t d) {
  return szm::qmc_grid(szm::IntegrationRegion(c.delta, d), c.grid_points, c.qmc_kind,
                       c.scramble ? std::optional<std::uint64_t>(c.scramble_seed) : std::nullopt);
}

}  // namespace

extern "C" {

const char* szm_last_error(void) { return g_last_error.c_str(); }

const char* szm_version(void) { return "1.0.0"; }

szm_status szm_sample_load(const char* path, szm_sample** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new szm_sample{szm::load_sample(path)};
  });
}

szm_status szm_sample_create(size_t n, size_t d, const double* values, szm_sample** out) {
  return guarded([&] {
    require(out, "out");
    if (n * d > 0) require(values, "values");
    *out = new szm_sample{szm::Sample(n, d, std::vector<double>(values, values + n * d))};
  });
}

szm_status szm_sample_draw(const szm_config* config, const char* model, uint64_t seed, size_t n,
                           szm_sample** out) {
  return guarded([&] {
    require(config, "config");
    require(model, "model");
    require(out, "out");
    const auto m = szm::make_model(model, config->value.model_params());
    *out = new szm_sample{m->sample(seed, n)};
  });
}

void szm_sample_free(szm_sample* sample) { delete sample; }

size_t szm_sample_size(const szm_sample* sample) { return sample ? sample->value.size() : 0; }

size_t szm_sample_dim(const szm_sample* sample) { return sample ? sample->value.dim() : 0; }

const double* szm_sample_data(const szm_sample* sample) {
  return sample ? sample->value.values().data() : nullptr;
}

szm_status szm_ecdf(const szm_sample* sample, const double* x, double* out) {
  return guarded([&] {
    require(sample, "sample");
    require(x, "x");
    require(out, "out");
    *out = szm::empirical_cdf(sample->value, {x, sample->value.dim()});
  });
}

szm_status szm_estimate(const szm_sample* sample, const int64_t* m, const double* x, double* out) {
  return guarded([&] {
    require(sample, "sample");
    require(x, "x");
    require(out, "out");
    const auto mv = smoothing(m, sample->value.dim());
    *out = szm::sm_estimate(sample->value, mv, {x, sample->value.dim()});
  });
}

szm_status szm_estimate_many(const szm_sample* sample, const int64_t* m, const double* points,
                             size_t count, double* out) {
  return guarded([&] {
    require(sample, "sample");
    if (count == 0) return;
    require(points, "points");
    require(out, "out");
    const szm::SmEstimator est(sample->value, smoothing(m, sample->value.dim()));
    const auto values = est.estimate_many({points, count * sample->value.dim()});
    std::copy(values.begin(), values.end(), out);
  });
}

szm_status szm_ecdf_many(const szm_sample* sample, const double* points, size_t count,
                         double* out) {
  return guarded([&] {
    require(sample, "sample");
    if (count == 0) return;
    require(points, "points");
    require(out, "out");
    const std::size_t d = sample->value.dim();
    for (std::size_t g = 0; g < count; ++g) out[g] = szm::empirical_cdf(sample->value, {points + g * d, d});
  });
}

szm_status szm_poisson_tail(double lambda, int64_t k, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = szm::poisson_tail(lambda, k);
  });
}

szm_status szm_config_create(szm_config** out) {
  return guarded([&] {
    require(out, "out");
    *out = new szm_config{};
  });
}

szm_status szm_config_load(const char* path, szm_config** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new szm_config{szm::load_config(path)};
  });
}

void szm_config_free(szm_config* config) { delete config; }

szm_status szm_config_set(szm_config* config, const char* key, const char* value) {
  return guarded([&] {
    require(config, "config");
    require(key, "key");
    require(value, "value");
    config->value.set(key, value);
  });
}

szm_status szm_config_get(const szm_config* config, const char* key, char* buf, size_t buflen,
                          size_t* needed) {
  return guarded([&] {
    require(config, "config");
    require(key, "key");
    const std::string v = config->value.get(key);
    if (needed) *needed = v.size() + 1;
    if (buf && buflen > 0) {
      const std::size_t k = std::min(buflen - 1, v.size());
      std::memcpy(buf, v.data(), k);
      buf[k] = '\0';
    }
  });
}

szm_status szm_config_validate(const szm_config* config) {
  return guarded([&] {
    require(config, "config");
    config->value.validate();
  });
}

size_t szm_config_key_count(void) { return szm::config_keys().size(); }

const char* szm_config_key_name(size_t i) {
  const auto keys = szm::config_keys();
  return i < keys.size() ? keys[i].name : nullptr;
}

const char* szm_config_key_description(size_t i) {
  const auto keys = szm::config_keys();
  return i < keys.size() ? keys[i].description : nullptr;
}

szm_status szm_grid_create(const szm_config* config, size_t d, szm_points** out) {
  return guarded([&] {
    require(config, "config");
    require(out, "out");
    const auto grid = grid_for(config->value, d);
    const auto p = grid.points();
    *out = new szm_points{grid.size(), d, std::vector<double>(p.begin(), p.end())};
  });
}

void szm_points_free(szm_points* points) { delete points; }

size_t szm_points_count(const szm_points* points) { return points ? points->count : 0; }

size_t szm_points_dim(const szm_points* points) { return points ? points->dim : 0; }

const double* szm_points_data(const szm_points* points) {
  return points ? points->data.data() : nullptr;
}

szm_status szm_select_m(const szm_sample* sample, const szm_config* config, szm_selection** out) {
  return guarded([&] {
    require(sample, "sample");
    require(config, "config");
    require(out, "out");
    const auto& c = config->value;
    if (!(c.delta > 0.0 && c.delta < 1.0)) throw szm::UsageError("delta must lie in (0, 1)");
    const auto grid = grid_for(c, sample->value.dim());
    auto sel = szm::select_m(sample->value, grid, c.domain, c.passes);
    const auto ms = sel.m_star.values();
    std::vector<std::int64_t> m_star(ms.begin(), ms.end());
    *out = new szm_selection{std::move(sel), std::move(m_star)};
  });
}

void szm_selection_free(szm_selection* selection) { delete selection; }

size_t szm_selection_dim(const szm_selection* selection) {
  return selection ? selection->m_star.size() : 0;
}

const int64_t* szm_selection_m_star(const szm_selection* selection) {
  return selection ? selection->m_star.data() : nullptr;
}

double szm_selection_score(const szm_selection* selection) {
  return selection ? selection->value.score : 0.0;
}

size_t szm_selection_trace_size(const szm_selection* selection) {
  return selection ? selection->value.trace.size() : 0;
}

szm_status szm_selection_trace_step(const szm_selection* selection, size_t k, int* pass,
                                    int* coordinate, int64_t* m, double* score) {
  return guarded([&] {
    require(selection, "selection");
    const auto& trace = selection->value.trace;
    if (k >= trace.size()) throw szm::UsageError("trace index out of range");
    const auto& step = trace[k];
    if (pass) *pass = step.pass;
    if (coordinate) *coordinate = step.coordinate;
    if (m) std::copy(step.m.values().begin(), step.m.values().end(), m);
    if (score) *score = step.score;
  });
}

szm_status szm_simulate(const szm_config* config, szm_progress_fn progress, void* user) {
  return guarded([&] {
    require(config, "config");
    std::function<void(const szm::ReplicationResult&)> hook;
    if (progress) {
      hook = [&](const szm::ReplicationResult& r) { progress(r.model.c_str(), r.n, r.rep, user); };
    }
    szm::run_experiment(config->value, hook);
  });
}

szm_status szm_tables(const char* raw_log, const char* out_dir) {
  return guarded([&] {
    require(raw_log, "raw_log");
    require(out_dir, "out_dir");
    szm::tables_from_log(raw_log, out_dir);
  });
}

size_t szm_suite_count(void) { return szm::validation_suites().size(); }

const char* szm_suite_name(size_t i) {
  const auto suites = szm::validation_suites();
  return i < suites.size() ? suites[i].c_str() : nullptr;
}

szm_status szm_validate(const char* suite, uint64_t seed, unsigned threads, double reps_scale,
                        szm_checks** out) {
  return guarded([&] {
    require(suite, "suite");
    require(out, "out");
    if (!(reps_scale > 0.0)) throw szm::UsageError("reps_scale must be positive");
    szm::ValidationOptions opt;
    opt.seed = seed;
    opt.threads = threads;
    opt.reps_scale = reps_scale;
    *out = new szm_checks{szm::run_suite(suite, opt)};
  });
}

void szm_checks_free(szm_checks* checks) { delete checks; }

size_t szm_checks_count(const szm_checks* checks) { return checks ? checks->rows.size() : 0; }

szm_status szm_check_get(const szm_checks* checks, size_t i, const char** name, double* predicted,
                         double* observed, double* tolerance, int* pass) {
  return guarded([&] {
    require(checks, "checks");
    if (i >= checks->rows.size()) throw szm::UsageError("check index out of range");
    const auto& r = checks->rows[i];
    if (name) *name = r.name.c_str();
    if (predicted) *predicted = r.predicted;
    if (observed) *observed = r.observed;
    if (tolerance) *tolerance = r.tolerance;
    if (pass) *pass = r.pass ? 1 : 0;
  });
}

int szm_checks_all_pass(const szm_checks* checks) {
  if (!checks) return 0;
  for (const auto& r : checks->rows) {
    if (!r.pass) return 0;
  }
  return 1;
}

}  // extern "C"
