#include "cli.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "manifest.hpp"
#include "ose/auth.hpp"
#include "ose/correlation.hpp"
#include "ose/error.hpp"
#include "ose/experiment.hpp"
#include "ose/heatmap.hpp"
#include "ose/optics.hpp"
#include "ose/pattern_io.hpp"
#include "ose/surface.hpp"
#include "units.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace ose::cli {
namespace {

constexpr double kDeg = 180.0 / std::numbers::pi;

const CLI::Validator kLength(
    [](std::string& s) -> std::string {
      try {
        parse_length(s);
        return {};
      } catch (const std::exception& e) {
        return e.what();
      }
    },
    "LENGTH");

const CLI::Validator kAngle(
    [](std::string& s) -> std::string {
      try {
        parse_angle(s);
        return {};
      } catch (const std::exception& e) {
        return e.what();
      }
    },
    "ANGLE");

struct Run {
  explicit Run(std::string command) : manifest(std::move(command)) {}

  RunManifest manifest;
  json result = json::object();
  std::ostringstream text;
  std::optional<fs::path> manifest_path;
  int code = kOk;
};

using Handler = std::function<void(Run&)>;

json collect_params(const CLI::App* sub) {
  json params = json::object();
  for (const CLI::Option* opt : sub->get_options()) {
    const std::string name = opt->get_single_name();
    if (name == "help") continue;
    if (opt->get_expected_min() == 0) {
      params[name] = opt->count() > 0;
      continue;
    }
    std::vector<std::string> values = opt->count() > 0 ? opt->results() : std::vector<std::string>{};
    if (values.empty()) {
      const std::string d = opt->get_default_str();
      if (d.empty()) continue;
      values.push_back(d);
    }
    if (values.size() == 1 && opt->get_expected_max() <= 1)
      params[name] = values.front();
    else
      params[name] = values;
  }
  return params;
}

void add_output(Run& run, const fs::path& p) {
  run.manifest.add_output(p);
  if (!run.manifest_path) run.manifest_path = manifest_path_for(p);
}

double unit_interval(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument(std::string(what) + " must lie in [0, 1]");
  return v;
}

// ---- shared flag groups ----------------------------------------------------

struct SearchFlags {
  std::string theta_range = "2.5deg";
  std::string theta_step = "0.25deg";
  int max_shift = 32;
  int refine = 0;
  unsigned threads = 0;

  void add(CLI::App* s) {
    s->add_option("--theta-range", theta_range, "Rotation sweep half-range")->check(kAngle)->capture_default_str();
    s->add_option("--theta-step", theta_step, "Rotation sweep step")->check(kAngle)->capture_default_str();
    s->add_option("--max-shift", max_shift, "Largest shift searched, pixels")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    s->add_option("--refine", refine, "Step-halving refinements around the best angle")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    s->add_option("--threads", threads, "Worker threads, 0 = all cores")->capture_default_str();
  }

  RotationSearch resolve() const {
    RotationSearch r;
    r.theta_range = parse_angle(theta_range);
    r.theta_step = parse_angle(theta_step);
    r.max_shift = max_shift;
    r.refine_levels = refine;
    r.threads = threads;
    r.validate();
    return r;
  }
};

struct PolicyFlags {
  SearchFlags search;
  double threshold = 0.5;
  double band = 0.05;

  void add(CLI::App* s) {
    search.add(s);
    s->add_option("--threshold", threshold, "Decision threshold on the peak score")->capture_default_str();
    s->add_option("--band", band, "Inconclusive half-width around the threshold")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
  }

  DecisionPolicy resolve() const {
    DecisionPolicy p;
    p.threshold = threshold;
    p.inconclusive_band = band;
    p.search = search.resolve();
    return p;
  }
};

json result_json(const CorrelationResult& r) {
  return {{"peak", r.peak},
          {"dx", r.dx},
          {"dy", r.dy},
          {"rotation_deg", r.rotation * kDeg},
          {"off_peak_mean", r.off_peak_mean},
          {"off_peak_std", r.off_peak_std}};
}

int verdict_code(Verdict v) {
  switch (v) {
    case Verdict::genuine:
      return kOk;
    case Verdict::counterfeit:
      return kCounterfeit;
    case Verdict::inconclusive:
      return kInconclusive;
  }
  return kInternal;
}

void describe_decision(Run& run, const AuthDecision& d) {
  run.result = d.to_json();
  run.text << "verdict: " << to_string(d.verdict) << " (threshold " << d.threshold << " +- "
           << d.inconclusive_band << ")\n";
  for (const auto& s : d.scores)
    run.text << "  " << s.fingerprint << "  peak " << s.result.peak << "  shift (" << s.result.dx << ", "
             << s.result.dy << ")  rotation " << s.result.rotation * kDeg << " deg\n";
  run.code = verdict_code(d.verdict);
}

std::vector<double> read_scores(const fs::path& p) {
  std::ifstream is(p);
  if (!is) throw IoError(p, "cannot open");
  std::vector<double> out;
  std::string line;
  while (std::getline(is, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    for (char& c : line)
      if (c == ',' || c == ';' || c == '\t') c = ' ';
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size()) throw InvalidArgument(p.string() + ": not a number: '" + tok + "'");
      out.push_back(v);
    }
  }
  return out;
}

// ---- subcommands -----------------------------------------------------------

Handler gen_surface(CLI::App* s) {
  struct F {
    fs::path out;
    std::size_t size = DeskScale{}.grid;
    std::size_t width = 0, height = 0;
    std::string pitch = "1um", sigma_h = "500nm", corr_len = "4um";
    std::uint64_t seed = 0;
  };
  auto f = std::make_shared<F>();
  s->add_option("--out", f->out, "Output height map (OSEH)")->required();
  s->add_option("--size", f->size, "Square grid size, samples")->check(CLI::PositiveNumber)->capture_default_str();
  s->add_option("--width", f->width, "Grid width, overrides --size");
  s->add_option("--height", f->height, "Grid height, overrides --size");
  s->add_option("--pitch", f->pitch, "Sample spacing")->check(kLength)->capture_default_str();
  s->add_option("--sigma-h", f->sigma_h, "RMS roughness")->check(kLength)->capture_default_str();
  s->add_option("--corr-len", f->corr_len, "Correlation length")->check(kLength)->capture_default_str();
  s->add_option("--seed", f->seed, "Surface seed")->capture_default_str();
  return [f](Run& run) {
    SurfaceParams p{parse_length(f->sigma_h), parse_length(f->corr_len), f->seed};
    const std::size_t w = f->width ? f->width : f->size;
    const std::size_t h = f->height ? f->height : f->size;
    const HeightMap map = generate_surface(p, w, h, parse_length(f->pitch));
    write_heightmap(f->out, map);
    run.manifest.add_seed("surface", f->seed);
    add_output(run, f->out);
    run.result = {{"output", f->out.generic_string()},
                  {"width", w},
                  {"height", h},
                  {"pitch_um", map.pitch() * 1e6},
                  {"rms_nm", map.rms() * 1e9}};
    run.text << "wrote " << f->out.string() << " (" << w << "x" << h << ", rms " << map.rms() * 1e9 << " nm)\n";
  };
}

Handler replicate(CLI::App* s) {
  struct F {
    fs::path in, out;
    std::string error_rms = "65nm", error_corr = "150um";
    double fine = DeskScale{}.replica_fine_fraction;
    std::uint64_t seed = 0;
  };
  auto f = std::make_shared<F>();
  s->add_option("--in", f->in, "Master height map")->required()->check(CLI::ExistingFile);
  s->add_option("--out", f->out, "Replica height map")->required();
  s->add_option("--error-rms", f->error_rms, "RMS replication error")->check(kLength)->capture_default_str();
  s->add_option("--error-corr", f->error_corr, "Correlation length of the error")
      ->check(kLength)
      ->capture_default_str();
  s->add_option("--fine-fraction", f->fine, "Error variance share at one-sample scale")->capture_default_str();
  s->add_option("--seed", f->seed, "Replica error seed")->capture_default_str();
  return [f](Run& run) {
    run.manifest.add_input(f->in);
    const HeightMap master = read_heightmap(f->in);
    ReplicaParams p;
    p.error_rms = parse_length(f->error_rms);
    p.corr_len = parse_length(f->error_corr);
    p.fine_fraction = unit_interval(f->fine, "--fine-fraction");
    p.seed = f->seed;
    const HeightMap replica = make_replica(master, p);
    write_heightmap(f->out, replica);
    run.manifest.add_seed("replica", f->seed);
    add_output(run, f->out);
    run.result = {{"output", f->out.generic_string()}, {"error_rms_nm", p.error_rms * 1e9}};
    run.text << "wrote " << f->out.string() << "\n";
  };
}

Handler occlude_cmd(CLI::App* s) {
  struct F {
    fs::path in, out;
    std::optional<double> fraction;
    std::vector<std::size_t> rect;
    std::string fill = "flat";
    std::string sigma_h = "500nm", corr_len = "4um";
    std::uint64_t seed = 0;
  };
  auto f = std::make_shared<F>();
  s->add_option("--in", f->in, "Input height map")->required()->check(CLI::ExistingFile);
  s->add_option("--out", f->out, "Output height map")->required();
  auto* frac = s->add_option("--fraction", f->fraction, "Left strip covering this share of the width");
  auto* rect = s->add_option("--rect", f->rect, "Rectangle x,y,w,h in samples")->delimiter(',')->expected(4);
  frac->excludes(rect);
  s->add_option("--fill", f->fill, "Replacement relief")
      ->check(CLI::IsMember({"flat", "random"}))
      ->capture_default_str();
  s->add_option("--fill-sigma-h", f->sigma_h, "RMS roughness of random fill")->check(kLength)->capture_default_str();
  s->add_option("--fill-corr-len", f->corr_len, "Correlation length of random fill")
      ->check(kLength)
      ->capture_default_str();
  s->add_option("--seed", f->seed, "Fill seed")->capture_default_str();
  return [f](Run& run) {
    if (!f->fraction && f->rect.empty()) throw InvalidArgument("occlude: one of --fraction or --rect is required");
    run.manifest.add_input(f->in);
    const HeightMap map = read_heightmap(f->in);
    OcclusionParams p;
    if (f->fraction)
      p.region = Fraction{unit_interval(*f->fraction, "--fraction")};
    else
      p.region = Rect{f->rect[0], f->rect[1], f->rect[2], f->rect[3]};
    p.fill = f->fill == "random" ? Fill::random : Fill::flat;
    p.seed = f->seed;
    p.fill_surface = SurfaceParams{parse_length(f->sigma_h), parse_length(f->corr_len), 0};
    const Rect r = resolve_region(p.region, map.width(), map.height());
    write_heightmap(f->out, occlude(map, p));
    run.manifest.add_seed("fill", f->seed);
    add_output(run, f->out);
    run.result = {{"output", f->out.generic_string()}, {"rect", {r.x, r.y, r.w, r.h}}, {"fill", f->fill}};
    run.text << "wrote " << f->out.string() << " (replaced " << r.w << "x" << r.h << " at " << r.x << "," << r.y
             << ")\n";
  };
}

Handler simulate(CLI::App* s) {
  struct F {
    fs::path in, out;
    std::string lambda = "650nm", theta = "0deg", aperture = "5mm", z = "75mm";
    std::size_t px_w = 512, px_h = 512;
    std::string px_pitch = "2.2265625um";
    int bit_depth = 8;
    double exposure = 1.0;
    std::uint64_t seed = 0;
    std::string offset_x = "0um", offset_y = "0um", rotation = "0deg";
    std::optional<std::string> holo_lambda;
    std::string holo_theta = "0deg";
  };
  auto f = std::make_shared<F>();
  s->add_option("--in", f->in, "Surface height map")->required()->check(CLI::ExistingFile);
  s->add_option("--out", f->out, "Output pattern (16-bit PNG plus JSON sidecar)")->required();
  s->add_option("--lambda", f->lambda, "Illumination wavelength")->check(kLength)->capture_default_str();
  s->add_option("--theta", f->theta, "Incidence angle")->check(kAngle)->capture_default_str();
  s->add_option("--aperture", f->aperture, "Aperture diameter D")->check(kLength)->capture_default_str();
  s->add_option("--z", f->z, "Aperture to sensor distance")->check(kLength)->capture_default_str();
  s->add_option("--px-w", f->px_w, "Sensor width, pixels")->capture_default_str();
  s->add_option("--px-h", f->px_h, "Sensor height, pixels")->capture_default_str();
  s->add_option("--px-pitch", f->px_pitch, "Sensor pixel pitch")->check(kLength)->capture_default_str();
  s->add_option("--bit-depth", f->bit_depth, "8, 12 or 16")
      ->check(CLI::IsMember({8, 12, 16}))
      ->capture_default_str();
  s->add_option("--exposure", f->exposure, "Illumination power scale")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  s->add_option("--seed", f->seed, "Sensor noise seed")->capture_default_str();
  s->add_option("--offset-x", f->offset_x, "Sample placement offset")->check(kLength)->capture_default_str();
  s->add_option("--offset-y", f->offset_y, "Sample placement offset")->check(kLength)->capture_default_str();
  s->add_option("--rotation", f->rotation, "Sample placement rotation")->check(kAngle)->capture_default_str();
  s->add_option("--hologram-recorded-at", f->holo_lambda,
                "Render a hologram copy recorded at this wavelength instead of the relief")
      ->check(kLength);
  s->add_option("--hologram-recorded-theta", f->holo_theta, "Incidence angle of the hologram recording")
      ->check(kAngle)
      ->capture_default_str();
  return [f](Run& run) {
    run.manifest.add_input(f->in);
    const HeightMap map = read_heightmap(f->in);
    OpticalConfig c;
    c.lambda = parse_length(f->lambda);
    c.theta_inc = parse_angle(f->theta);
    c.aperture_d = parse_length(f->aperture);
    c.dist_z = parse_length(f->z);
    c.sensor = SensorSpec{f->px_w, f->px_h, parse_length(f->px_pitch), f->bit_depth};
    c.illum_power_scale = f->exposure;
    c.validate();
    const Pose pose{parse_length(f->offset_x), parse_length(f->offset_y), parse_angle(f->rotation)};

    SpecklePattern pattern;
    if (f->holo_lambda) {
      OpticalConfig rec = c;
      rec.lambda = parse_length(*f->holo_lambda);
      rec.theta_inc = parse_angle(f->holo_theta);
      pattern = simulate_hologram_copy(map, rec, c, f->seed, pose);
    } else {
      pattern = simulate_speckle(map, c, f->seed, pose);
    }
    write_pattern(f->out, pattern, c);
    run.manifest.add_seed("noise", f->seed);
    add_output(run, f->out);
    run.manifest.add_output(sidecar_path(f->out));
    run.result = {{"output", f->out.generic_string()},
                  {"fingerprint", pattern.fingerprint()},
                  {"hologram", f->holo_lambda.has_value()},
                  {"expected_speckle_px", expected_speckle_diameter(c) / c.sensor.px_pitch}};
    run.text << "wrote " << f->out.string() << " (setup " << pattern.fingerprint() << ")\n";
  };
}

Handler speckle_size(CLI::App* s) {
  struct F {
    fs::path in;
    std::optional<fs::path> report;
  };
  auto f = std::make_shared<F>();
  s->add_option("--in", f->in, "Pattern PNG with sidecar")->required()->check(CLI::ExistingFile);
  s->add_option("--report", f->report, "Write the result JSON here");
  return [f](Run& run) {
    run.manifest.add_input(f->in);
    run.manifest.add_input(sidecar_path(f->in));
    const StoredPattern sp = read_pattern(f->in);
    const double measured = measured_speckle_diameter(sp.pattern);
    const double expected = expected_speckle_diameter(sp.config) / sp.config.sensor.px_pitch;
    run.result = {{"measured_px", measured},
                  {"expected_px", expected},
                  {"expected_um", expected_speckle_diameter(sp.config) * 1e6},
                  {"ratio", measured / expected}};
    run.text << "speckle diameter: measured " << measured << " px, expected " << expected << " px (ratio "
             << measured / expected << ")\n";
  };
}

Handler correlate(CLI::App* s, bool heatmap_required) {
  struct F {
    fs::path a, b;
    std::optional<fs::path> heatmap;
    SearchFlags search;
  };
  auto f = std::make_shared<F>();
  s->add_option("--a", f->a, "Reference pattern PNG")->required()->check(CLI::ExistingFile);
  s->add_option("--b", f->b, "Test pattern PNG")->required()->check(CLI::ExistingFile);
  auto* hm = s->add_option(heatmap_required ? "--out" : "--heatmap", f->heatmap,
                           "Heat map of the winning rotation (.csv or .png)");
  if (heatmap_required) hm->required();
  f->search.add(s);
  return [f](Run& run) {
    run.manifest.add_input(f->a);
    run.manifest.add_input(f->b);
    const StoredPattern a = read_pattern(f->a);
    const StoredPattern b = read_pattern(f->b);
    const RotationMatch m = search_rotations(a.pattern.to_image(), b.pattern.to_image(), f->search.resolve());
    run.result = result_json(m.result);
    if (f->heatmap) {
      const auto ext = f->heatmap->extension();
      const HeatmapFormat fmt = ext == ".png" ? HeatmapFormat::png : HeatmapFormat::csv;
      if (ext != ".png" && ext != ".csv") throw InvalidArgument("heat map path must end in .csv or .png");
      export_heatmap(m.map, *f->heatmap, fmt);
      add_output(run, *f->heatmap);
      fs::path side = *f->heatmap;
      run.manifest.add_output(side.replace_extension(".json"));
      run.result["heatmap"] = f->heatmap->generic_string();
    }
    run.text << "peak " << m.result.peak << " at shift (" << m.result.dx << ", " << m.result.dy << "), rotation "
             << m.result.rotation * kDeg << " deg\n";
  };
}

Handler enroll(CLI::App* s) {
  struct F {
    fs::path store;
    std::string id;
    std::vector<fs::path> patterns;
    std::string created_at;
  };
  auto f = std::make_shared<F>();
  s->add_option("--store", f->store, "Reference store directory")->required();
  s->add_option("--id", f->id, "Item identifier")->required();
  s->add_option("--pattern", f->patterns, "Pattern PNG, one per setup (repeatable)")
      ->required()
      ->check(CLI::ExistingFile);
  s->add_option("--created-at", f->created_at, "Timestamp to record (default: now, UTC)");
  return [f](Run& run) {
    std::vector<Entry> entries;
    for (const auto& p : f->patterns) {
      run.manifest.add_input(p);
      run.manifest.add_input(sidecar_path(p));
      StoredPattern sp = read_pattern(p);
      entries.push_back({std::move(sp.pattern), sp.config});
    }
    ReferenceStore store(f->store);
    const ReferenceRecord rec = store.enroll(f->id, std::move(entries), f->created_at);
    const fs::path dir = f->store / f->id;
    run.manifest.add_output(dir);
    run.manifest_path = f->store / (f->id + ".manifest.json");
    json fps = json::array();
    for (const auto& e : rec.entries) fps.push_back(e.pattern.fingerprint());
    run.result = {{"id", rec.id},
                  {"content_hash", rec.content_hash},
                  {"created_at", rec.created_at},
                  {"fingerprints", fps}};
    run.text << "enrolled " << rec.id << " (" << rec.entries.size() << " setups, hash " << rec.content_hash
             << ")\n";
  };
}

Handler verify_cmd(CLI::App* s) {
  struct F {
    fs::path store;
    std::string id;
    fs::path pattern;
    std::optional<fs::path> report;
    PolicyFlags policy;
  };
  auto f = std::make_shared<F>();
  s->add_option("--store", f->store, "Reference store directory")->required()->check(CLI::ExistingDirectory);
  s->add_option("--id", f->id, "Item identifier")->required();
  s->add_option("--pattern", f->pattern, "Captured pattern PNG")->required()->check(CLI::ExistingFile);
  s->add_option("--report", f->report, "Write the decision JSON here");
  f->policy.add(s);
  return [f](Run& run) {
    run.manifest.add_input(f->pattern);
    run.manifest.add_input(sidecar_path(f->pattern));
    const StoredPattern sp = read_pattern(f->pattern);
    const ReferenceStore store(f->store);
    describe_decision(run, verify(store, f->id, sp.pattern, sp.config, f->policy.resolve()));
  };
}

Handler challenge_cmd(CLI::App* s) {
  struct F {
    fs::path store;
    std::string id;
    std::vector<fs::path> probes;
    std::size_t min_probes = 2;
    std::optional<fs::path> report;
    PolicyFlags policy;
  };
  auto f = std::make_shared<F>();
  s->add_option("--store", f->store, "Reference store directory")->required()->check(CLI::ExistingDirectory);
  s->add_option("--id", f->id, "Item identifier")->required();
  s->add_option("--probe", f->probes, "Captured pattern PNG, one per setup (repeatable)")
      ->required()
      ->check(CLI::ExistingFile);
  s->add_option("--min-probes", f->min_probes, "Fewest distinct setups accepted")->capture_default_str();
  s->add_option("--report", f->report, "Write the decision JSON here");
  f->policy.add(s);
  return [f](Run& run) {
    std::vector<Entry> probes;
    for (const auto& p : f->probes) {
      run.manifest.add_input(p);
      run.manifest.add_input(sidecar_path(p));
      StoredPattern sp = read_pattern(p);
      probes.push_back({std::move(sp.pattern), sp.config});
    }
    const ReferenceStore store(f->store);
    describe_decision(run, challenge_verify(store, f->id, probes, f->policy.resolve(), f->min_probes));
  };
}

Handler calibrate(CLI::App* s) {
  struct F {
    fs::path genuine, impostor;
    std::optional<fs::path> report;
  };
  auto f = std::make_shared<F>();
  s->add_option("--genuine", f->genuine, "Text file of genuine scores")->required()->check(CLI::ExistingFile);
  s->add_option("--impostor", f->impostor, "Text file of impostor scores")->required()->check(CLI::ExistingFile);
  s->add_option("--report", f->report, "Write the result JSON here");
  return [f](Run& run) {
    run.manifest.add_input(f->genuine);
    run.manifest.add_input(f->impostor);
    const auto g = read_scores(f->genuine);
    const auto i = read_scores(f->impostor);
    const Calibration c = calibrate_threshold(g, i);
    run.result = {{"threshold", c.threshold}, {"margin", c.margin}, {"genuine", g.size()}, {"impostor", i.size()}};
    run.text << "threshold " << c.threshold << " (margin " << c.margin << ")\n";
  };
}

Handler repro_table1(CLI::App* s) {
  struct F {
    fs::path out;
    std::vector<std::uint64_t> seeds{1};
    std::size_t grid = DeskScale{}.grid;
    std::string error_rms = "65nm";
    int max_shift = DeskScale{}.search.max_shift;
    unsigned threads = 0;
  };
  auto f = std::make_shared<F>();
  s->add_option("--out", f->out, "Output directory")->required();
  s->add_option("--seed", f->seeds, "Seed set (repeatable)")->capture_default_str();
  s->add_option("--grid", f->grid, "Surface grid size, samples")->capture_default_str();
  s->add_option("--error-rms", f->error_rms, "Replica error RMS")->check(kLength)->capture_default_str();
  s->add_option("--max-shift", f->max_shift, "Largest shift searched, pixels")->capture_default_str();
  s->add_option("--threads", f->threads, "Worker threads, 0 = all cores")->capture_default_str();
  return [f](Run& run) {
    DeskScale desk;
    desk.grid = f->grid;
    desk.replica_error_rms = parse_length(f->error_rms);
    desk.search.max_shift = f->max_shift;
    desk.search.threads = f->threads;

    json sets = json::array();
    bool all_pass = true;
    for (std::uint64_t seed : f->seeds) {
      const fs::path dir = f->seeds.size() == 1 ? f->out : f->out / ("seed_" + std::to_string(seed));
      const Table1Result r = run_table1(desk, seed);
      for (const auto& p : write_table1_report(dir, r)) run.manifest.add_output(p);
      run.manifest.add_seed("set_" + std::to_string(seed), seed);
      all_pass = all_pass && r.pass();
      sets.push_back({{"seed", seed},
                      {"directory", dir.generic_string()},
                      {"min_same_surface", r.min_same()},
                      {"max_cross_surface", r.max_cross()},
                      {"seconds", r.seconds},
                      {"pass", r.pass()}});
      run.text << "seed " << seed << ": " << (r.pass() ? "PASS" : "FAIL") << "  diagonal "
               << (r.diagonal_is_unity() ? "1.0" : "!= 1") << ", same-surface min " << r.min_same()
               << " (>= 0.80), cross-surface max " << r.max_cross() << " (<= 0.15), " << r.seconds << " s\n";
    }
    run.result = {{"sets", sets}, {"pass", all_pass}};
    run.manifest_path = f->out / "run.manifest.json";
  };
}

void write_report(const std::optional<fs::path>& report, Run& run) {
  if (!report) return;
  std::ofstream os(*report, std::ios::trunc);
  if (!os) throw IoError(*report, "cannot open for writing");
  os << run.result.dump(2) << '\n';
  if (!os) throw IoError(*report, "write failed");
  add_output(run, *report);
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app("Optical security element simulation and speckle authentication", "ose");
  app.fallthrough();
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);
  bool as_json = false;
  std::optional<fs::path> manifest_override;
  app.add_flag("--json", as_json, "Print the result as JSON on stdout");
  app.add_option("--manifest", manifest_override, "Write the run manifest here");
  app.set_version_flag("--version", OSE_VERSION);

  std::vector<std::pair<CLI::App*, Handler>> commands;
  auto add = [&](const char* name, const char* help, auto make) {
    CLI::App* sub = app.add_subcommand(name, help);
    commands.emplace_back(sub, make(sub));
  };
  add("gen-surface", "Generate a random master relief", gen_surface);
  add("replicate", "Copy a master with replication error", replicate);
  add("occlude", "Replace part of a relief", occlude_cmd);
  add("simulate", "Render the speckle pattern of a relief", simulate);
  add("speckle-size", "Measure the mean speckle diameter of a pattern", speckle_size);
  add("correlate", "Peak correlation over shifts and rotations", [](CLI::App* s) { return correlate(s, false); });
  add("heatmap", "Export the correlation surface of a pair", [](CLI::App* s) { return correlate(s, true); });
  add("enroll", "Store reference patterns for an item", enroll);
  add("verify", "Single-setup verification against the store", verify_cmd);
  add("challenge", "Multi-setup verification against the store", challenge_cmd);
  add("calibrate", "Threshold from genuine and impostor scores", calibrate);
  add("repro-table1", "Two masters, two replicas each, full correlation matrix", repro_table1);

  if (args.empty()) {
    err << app.help();
    return kUsage;
  }
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  for (auto& [sub, handler] : commands) {
    if (!sub->parsed()) continue;
    try {
      Run run(sub->get_name());
      run.manifest.set_params(collect_params(sub));
      handler(run);
      if (const CLI::Option* r = sub->get_option_no_throw("--report"); r && r->count() > 0)
        write_report(fs::path(r->as<std::string>()), run);
      if (manifest_override) run.manifest_path = manifest_override;
      if (run.manifest_path) {
        run.manifest.write(*run.manifest_path);
      } else {
        run.result["manifest"] = run.manifest.to_json();
      }
      if (as_json)
        out << run.result.dump(2) << '\n';
      else
        out << run.text.str();
      return run.code;
    } catch (const IoError& e) {
      err << "error: " << e.what() << '\n';
      return kInternal;
    } catch (const Error& e) {
      err << "error: " << e.what() << '\n';
      return kUsage;
    } catch (const std::exception& e) {
      err << "internal error: " << e.what() << '\n';
      return kInternal;
    }
  }
  err << app.help();
  return kUsage;
}

int dispatch(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dispatch(args, std::cout, std::cerr);
}

}  // namespace ose::cli
