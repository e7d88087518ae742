#include "dualcycle/experiment.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <stdexcept>
#include <utility>

#include "dualcycle/image_io.hpp"

namespace dualcycle {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Seed-path tags. A trial seed is derive_seed(config seed, {tag, indices...});
// the tag keeps streams from different phases disjoint even when the index
// tuples coincide.
enum SeedTag : uint64_t {
  kSeedMaskPhase = 1,   // {tag, tuple, combo, trial}
  kSeedEditEncode = 2,  // {tag, tuple, step index, trial}
  kSeedEditBlend = 3,   // {tag, tuple, step index, trial, scale index, k index, mask flavor}
  kSeedCellEdit = 4,    // {tag, cell, tuple, step index, trial, scale index, k index}
  kSeedSdedit = 5,      // {tag, tuple, step index, scale index, trial}
  kSeedDiffedit = 6,    // {tag, tuple, step index, trial[, scale index]}
};

struct Mean {
  double sum = 0.0;
  long n = 0;
  void add(double v) { sum += v; ++n; }
  double value() const { return n > 0 ? sum / n : kNaN; }
};

std::string format_double(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

void or_into(std::vector<uint8_t>& acc, const std::vector<uint8_t>& region) {
  for (size_t i = 0; i < acc.size(); ++i) acc[i] = acc[i] || region[i];
}

std::unique_ptr<FeatureExtractor> make_extractor(const MaskOptions& m) {
  if (m.plain_features)
    return std::make_unique<PatchMeanExtractor>(m.grid_rows, m.grid_cols);
  return std::make_unique<PatchStatsExtractor>(m.grid_rows, m.grid_cols);
}

struct TupleContext {
  const EditTuple* tuple = nullptr;
  ImageTensor x0_src;
  std::vector<uint8_t> edit_px;
  std::vector<uint8_t> offtarget_px;
  bool edit_has_outside = false;  // edit_px leaves some pixel untouched
  std::string dir;                // per-tuple output directory, empty = no output
  std::string rel_dir;            // the same directory relative to the output root;
                                  // records store this form so two runs into
                                  // different roots emit byte-identical CSVs
};

double outside_psnr_or_nan(const ImageTensor& a, const ImageTensor& b, const TupleContext& ctx) {
  if (!ctx.edit_has_outside) return kNaN;
  return psnr_outside(a, b, ctx.edit_px);
}

}  // namespace

RunRecord::RunRecord()
    : dec_scale(kNaN),
      psnr(kNaN),
      ssim(kNaN),
      align(kNaN),
      d_align(kNaN),
      mask_area(kNaN),
      offtarget_iou(kNaN),
      psnr_outside(kNaN) {}

ExperimentSummary::ExperimentSummary()
    : biased_offtarget_iou(kNaN),
      unbiased_offtarget_iou(kNaN),
      plain_psnr_outside(kNaN),
      masked_psnr_outside(kNaN),
      plain_d_align(kNaN),
      masked_d_align(kNaN) {}

ModeSummaryRow::ModeSummaryRow()
    : psnr(kNaN),
      ssim(kNaN),
      align(kNaN),
      d_align(kNaN),
      mask_area(kNaN),
      offtarget_iou(kNaN),
      psnr_outside(kNaN) {}

std::string records_csv_header() {
  return "tuple,phase,mode,features,dec_scale,noise_step,k,trial,seed,status,psnr,ssim,align,"
         "d_align,mask_area,offtarget_iou,psnr_outside,selected,file,note";
}

std::string record_to_csv(const RunRecord& r) {
  std::string out;
  out += csv_field(r.tuple);
  out += ',';
  out += r.phase;
  out += ',';
  out += r.mode;
  out += ',';
  out += r.features;
  out += ',';
  out += format_double(r.dec_scale);
  out += ',';
  if (r.noise_step >= 0) out += std::to_string(r.noise_step);
  out += ',';
  if (r.k >= 0) out += std::to_string(r.k);
  out += ',';
  if (r.trial >= 0) out += std::to_string(r.trial);
  out += ',';
  if (r.trial >= 0) out += std::to_string(r.seed);
  out += ',';
  out += r.status;
  out += ',';
  out += format_double(r.psnr);
  out += ',';
  out += format_double(r.ssim);
  out += ',';
  out += format_double(r.align);
  out += ',';
  out += format_double(r.d_align);
  out += ',';
  out += format_double(r.mask_area);
  out += ',';
  out += format_double(r.offtarget_iou);
  out += ',';
  out += format_double(r.psnr_outside);
  out += ',';
  out += std::to_string(r.selected);
  out += ',';
  out += csv_field(r.file);
  out += ',';
  out += csv_field(r.note);
  return out;
}

void write_records_csv(const std::vector<RunRecord>& records, const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // binary keeps \n literal everywhere
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << records_csv_header() << '\n';
  for (const RunRecord& r : records) out << record_to_csv(r) << '\n';
  if (!out) throw std::runtime_error("short write to " + path);
}

std::string resolve_output_dir(const std::string& output_dir) {
  if (output_dir.empty()) return {};
  const char* root = std::getenv("DUALCYCLE_OUTPUT_ROOT");
  if (root && *root && !std::filesystem::path(output_dir).is_absolute())
    return (std::filesystem::path(root) / output_dir).string();
  return output_dir;
}

std::vector<uint8_t> edit_region(const EditTuple& tuple) {
  const int h = tuple.source.height, w = tuple.source.width;
  std::vector<uint8_t> out(static_cast<size_t>(h) * w, 0);
  for (const auto& [name, target_value] : tuple.c_target.attributes()) {
    const auto it = tuple.source.assignment.find(name);
    if (it == tuple.source.assignment.end())
      throw std::invalid_argument("tuple \"" + tuple.name + "\": target binds attribute \"" +
                                  name + "\" missing from the source scene");
    if (it->second != target_value) or_into(out, region_pixels(attribute_region(name), h, w));
  }
  return out;
}

std::vector<uint8_t> offtarget_region(const EditTuple& tuple, const Vocabulary& vocabulary) {
  const int h = tuple.source.height, w = tuple.source.width;
  std::vector<uint8_t> out(static_cast<size_t>(h) * w, 0);
  for (const AttributeDef& def : vocabulary.attributes()) {
    if (tuple.c_source.value_of(def.name) || tuple.c_target.value_of(def.name)) continue;
    or_into(out, region_pixels(attribute_region(def.name), h, w));
  }
  return out;
}

ImageTensor sdedit_edit(const ImageTensor& x0, const Condition& c, int noise_step, double scale,
                        const Denoiser& den, const NoiseSchedule& sched, RandomStream& rng) {
  if (noise_step < 1 || noise_step > sched.steps)
    throw std::invalid_argument("sdedit_edit: noise_step out of range");
  ImageTensor x = forward_sample(x0, noise_step, sched, rng);
  for (int t = noise_step; t >= 1; --t) {
    ImageTensor mean = guided_mean(x, t, c, den, sched, scale);
    ImageTensor noise = rng.normal_image(x.height, x.width, x.channels);
    x = reverse_step(x, t, mean, noise, sched);
  }
  return x;
}

EditMask contrast_mask(const ImageTensor& x0, const Condition& c_src, const Condition& c_tgt,
                       int noise_step, int rows, int cols, int draws, const Denoiser& den,
                       const NoiseSchedule& sched, RandomStream& rng) {
  if (noise_step < 1 || noise_step > sched.steps)
    throw std::invalid_argument("contrast_mask: noise_step out of range");
  if (draws < 1) throw std::invalid_argument("contrast_mask: draws must be at least 1");
  if (rows < 1 || cols < 1 || x0.height < rows || x0.width < cols)
    throw std::invalid_argument("contrast_mask: grid does not fit the image");
  const int t = std::max(1, noise_step / 2);
  const StepCoeffs coeffs = step_coeffs(sched, t);

  ImageTensor contrast(x0.height, x0.width, 1);
  for (int d = 0; d < draws; ++d) {
    const ImageTensor xt = forward_sample(x0, t, sched, rng);
    const ImageTensor mean_t = den.reverse_mean(xt, t, c_tgt);
    const ImageTensor mean_s = den.reverse_mean(xt, t, c_src);
    for (int y = 0; y < x0.height; ++y)
      for (int x = 0; x < x0.width; ++x) {
        double acc = 0.0;
        for (int c = 0; c < x0.channels; ++c) {
          // Same affine inversion for both conditions, so the xt terms cancel
          // and the contrast reduces to the mean difference over |b|.
          acc += std::abs(mean_t.at(y, x, c) - mean_s.at(y, x, c)) / std::abs(coeffs.b);
        }
        contrast.at(y, x, 0) += acc / x0.channels;
      }
  }

  // Cell means, then reuse the magnitude branch of binarize (min-max
  // normalize and threshold at 0.5). Values exceed the cosine range, which
  // the normalization absorbs.
  SimilarityGrid cells;
  cells.rows = rows;
  cells.cols = cols;
  cells.values.assign(static_cast<size_t>(rows) * cols, 0.0);
  for (int i = 0; i < rows; ++i) {
    const int y0 = i * x0.height / rows, y1 = (i + 1) * x0.height / rows;
    for (int j = 0; j < cols; ++j) {
      const int x0c = j * x0.width / cols, x1c = (j + 1) * x0.width / cols;
      double sum = 0.0;
      for (int y = y0; y < y1; ++y)
        for (int x = x0c; x < x1c; ++x) sum += contrast.at(y, x, 0);
      cells.at(i, j) = sum / ((y1 - y0) * (x1c - x0c)) / draws;
    }
  }
  return binarize(cells, 0.5, BinarizeMode::similarity);
}

namespace {

TupleContext make_context(const EditTuple& tuple, const Vocabulary& vocabulary,
                          const std::string& out_root) {
  if (tuple.name.empty() || tuple.name.find_first_of("/\\,") != std::string::npos)
    throw std::invalid_argument("tuple name must be a file-name-safe token: \"" + tuple.name +
                                "\"");
  TupleContext ctx;
  ctx.tuple = &tuple;
  ctx.x0_src = render_scene(tuple.source);
  ctx.edit_px = edit_region(tuple);
  ctx.offtarget_px = offtarget_region(tuple, vocabulary);
  ctx.edit_has_outside =
      std::find(ctx.edit_px.begin(), ctx.edit_px.end(), uint8_t{0}) != ctx.edit_px.end();
  if (!out_root.empty()) {
    ctx.dir = out_root + "/" + tuple.name;
    ctx.rel_dir = tuple.name;
    std::filesystem::create_directories(ctx.dir);
  }
  return ctx;
}

void validate_sweep(const ExperimentConfig& cfg, const NoiseSchedule& sched) {
  if (cfg.trials < 1) throw std::invalid_argument("trials must be at least 1");
  if (cfg.decode_scales.empty() || cfg.noise_steps.empty() || cfg.blend_steps.empty())
    throw std::invalid_argument("sweep sets must not be empty");
  for (int s : cfg.noise_steps)
    if (s < 1 || s > sched.steps) throw std::invalid_argument("noise_steps outside [1, steps]");
  for (int k : cfg.blend_steps)
    if (k < 1 || k > sched.steps) throw std::invalid_argument("blend_steps outside [1, steps]");
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, std::ostream* log) {
  ExperimentConfig c = cfg;
  if (c.tuples.empty()) c.tuples = default_tuples();
  const NoiseSchedule sched = make_schedule(c.schedule);
  validate_sweep(c, sched);
  const MixtureWorld world = make_world(c.world);
  const AnalyticDenoiser den(world, sched);
  const std::string features = c.mask.plain_features ? "means" : "stats";
  const auto extractor = make_extractor(c.mask);

  const std::string out_root = resolve_output_dir(c.output_dir);
  if (!out_root.empty()) std::filesystem::create_directories(out_root);

  ExperimentResult result;
  std::vector<RunRecord>& records = result.records;
  Mean biased_iou, unbiased_iou, plain_pout, masked_pout, plain_d, masked_d;

  auto count_ok = [&result] { ++result.summary.ok_trials; };
  auto count_error = [&result](RunRecord& r, const std::exception& e) {
    r.status = "error";
    r.note = e.what();
    ++result.summary.error_trials;
    result.all_ok = false;
  };

  std::vector<TupleContext> ctxs;
  for (const EditTuple& tuple : c.tuples) {
    TupleContext ctx = make_context(tuple, world.vocabulary(), out_root);
    RunRecord r;
    r.tuple = tuple.name;
    r.phase = "render";
    r.mode = "source";
    if (!ctx.dir.empty()) {
      r.file = ctx.rel_dir + "/source.png";
      write_png(ctx.x0_src, ctx.dir + "/source.png");
    }
    records.push_back(std::move(r));
    ctxs.push_back(std::move(ctx));
  }

  const int n_scales = static_cast<int>(c.decode_scales.size());
  const int n_steps = static_cast<int>(c.noise_steps.size());
  const int n_ks = static_cast<int>(c.blend_steps.size());
  const int h = world.height(), w = world.width();

  // ---- Mask phase: dual cycles, per-trial masks, per-tuple averages ----
  for (size_t ti = 0; ti < ctxs.size(); ++ti) {
    TupleContext& ctx = ctxs[ti];
    const EditTuple& tuple = *ctx.tuple;
    std::vector<EditMask> biased_trials, unbiased_trials;
    ImageTensor inverted_example;

    for (int si = 0; si < n_steps; ++si) {
      const int noise_step = c.noise_steps[si];
      if (log) *log << "[mask] " << tuple.name << " noise_step=" << noise_step << "\n";
      for (int ci = 0; ci < n_scales; ++ci) {
        const double scale = c.decode_scales[ci];
        const uint64_t combo = static_cast<uint64_t>(si) * n_scales + ci;
        for (int trial = 0; trial < c.trials; ++trial) {
          const uint64_t seed = derive_seed(c.seed, {kSeedMaskPhase, ti, combo, static_cast<uint64_t>(trial)});
          RandomStream rng(seed);
          RunRecord base;
          base.tuple = tuple.name;
          base.features = features;
          base.dec_scale = scale;
          base.noise_step = noise_step;
          base.trial = trial;
          base.seed = seed;
          try {
            CycleOutput cyc = be_cycle(ctx.x0_src, tuple.c_source, tuple.c_target, den, sched,
                                       c.encode_scale, scale, noise_step, rng);
            EditMask biased =
                grid_refine(ctx.x0_src, cyc.x0_target, *extractor, c.mask.delta, c.mask.mode);
            EditMask unbiased =
                grid_refine(cyc.x0_inv, cyc.x0_target, *extractor, c.mask.delta, c.mask.mode);
            const double biou = mask_region_iou(resize_mask(biased, h, w), ctx.offtarget_px);
            const double uiou = mask_region_iou(resize_mask(unbiased, h, w), ctx.offtarget_px);
            biased_iou.add(biou);
            unbiased_iou.add(uiou);

            RunRecord plain = base;
            plain.phase = "cycle";
            plain.mode = "plain";
            const ScoreReport score =
                score_edit(cyc.x0_target, ctx.x0_src, tuple.c_target, tuple.c_source, world);
            plain.psnr = score.psnr;
            plain.ssim = score.ssim;
            plain.align = score.align;
            plain.d_align = score.d_align;
            plain.psnr_outside = outside_psnr_or_nan(cyc.x0_target, ctx.x0_src, ctx);
            records.push_back(std::move(plain));

            RunRecord inverted = base;
            inverted.phase = "cycle";
            inverted.mode = "inverted";
            inverted.psnr = psnr(cyc.x0_inv, ctx.x0_src);
            inverted.ssim = ssim(cyc.x0_inv, ctx.x0_src);
            inverted.align = alignment(cyc.x0_inv, tuple.c_source, world);
            records.push_back(std::move(inverted));

            RunRecord mask_b = base;
            mask_b.phase = "mask";
            mask_b.mode = "biased";
            mask_b.mask_area = mask_area_fraction(biased);
            mask_b.offtarget_iou = biou;
            records.push_back(std::move(mask_b));

            RunRecord mask_u = base;
            mask_u.phase = "mask";
            mask_u.mode = "unbiased";
            mask_u.mask_area = mask_area_fraction(unbiased);
            mask_u.offtarget_iou = uiou;
            records.push_back(std::move(mask_u));

            if (inverted_example.data.empty()) inverted_example = cyc.x0_inv;
            biased_trials.push_back(std::move(biased));
            unbiased_trials.push_back(std::move(unbiased));
            count_ok();
          } catch (const std::exception& e) {
            RunRecord err = base;
            err.phase = "cycle";
            err.mode = "plain";
            count_error(err, e);
            records.push_back(std::move(err));
          }
        }
      }
    }

    TupleArtifacts art;
    art.name = tuple.name;
    if (!biased_trials.empty()) {
      art.biased_mask = average_masks(biased_trials, c.mask.vote_threshold);
      art.unbiased_mask = average_masks(unbiased_trials, c.mask.vote_threshold);

      RunRecord agg_b;
      agg_b.tuple = tuple.name;
      agg_b.phase = "mask";
      agg_b.mode = "biased";
      agg_b.features = features;
      agg_b.mask_area = mask_area_fraction(art.biased_mask);
      agg_b.offtarget_iou = mask_region_iou(resize_mask(art.biased_mask, h, w), ctx.offtarget_px);
      agg_b.note = "averaged over all combinations and trials";
      if (!ctx.dir.empty()) {
        agg_b.file = ctx.rel_dir + "/mask_biased.pgm";
        write_pgm(art.biased_mask, ctx.dir + "/mask_biased.pgm");
      }
      records.push_back(std::move(agg_b));

      RunRecord agg_u;
      agg_u.tuple = tuple.name;
      agg_u.phase = "mask";
      agg_u.mode = "unbiased";
      agg_u.features = features;
      agg_u.mask_area = mask_area_fraction(art.unbiased_mask);
      agg_u.offtarget_iou = mask_region_iou(resize_mask(art.unbiased_mask, h, w), ctx.offtarget_px);
      agg_u.note = "averaged over all combinations and trials";
      if (!ctx.dir.empty()) {
        agg_u.file = ctx.rel_dir + "/mask_unbiased.pgm";
        write_pgm(art.unbiased_mask, ctx.dir + "/mask_unbiased.pgm");
      }
      records.push_back(std::move(agg_u));

      if (!ctx.dir.empty() && !inverted_example.data.empty()) {
        RunRecord inv;
        inv.tuple = tuple.name;
        inv.phase = "cycle";
        inv.mode = "inverted";
        inv.features = features;
        inv.note = "first completed trial";
        inv.file = ctx.rel_dir + "/inverted_example.png";
        write_png(inverted_example, ctx.dir + "/inverted_example.png");
        records.push_back(std::move(inv));
      }
    } else {
      RunRecord err;
      err.tuple = tuple.name;
      err.phase = "mask";
      err.mode = "unbiased";
      err.status = "error";
      err.note = "no completed trials, no mask available";
      records.push_back(std::move(err));
      result.all_ok = false;
    }
    result.tuples.push_back(std::move(art));
  }

  // ---- Edit phase: masked edits with the averaged unbiased mask ----
  struct EditCombo {
    int si, ci, ki;
  };
  std::vector<EditCombo> combos;
  std::vector<int> combo_index(static_cast<size_t>(n_steps) * n_scales * n_ks, -1);
  for (int si = 0; si < n_steps; ++si)
    for (int ci = 0; ci < n_scales; ++ci)
      for (int ki = 0; ki < n_ks; ++ki) {
        if (c.blend_steps[ki] > c.noise_steps[si]) continue;
        combo_index[(static_cast<size_t>(si) * n_scales + ci) * n_ks + ki] =
            static_cast<int>(combos.size());
        combos.push_back({si, ci, ki});
      }
  if (combos.empty()) throw std::invalid_argument("no blend step fits any noise step");

  for (size_t ti = 0; ti < ctxs.size(); ++ti) {
    TupleContext& ctx = ctxs[ti];
    const EditTuple& tuple = *ctx.tuple;
    TupleArtifacts& art = result.tuples[ti];
    if (art.unbiased_mask.values.empty()) {
      RunRecord err;
      err.tuple = tuple.name;
      err.phase = "edit";
      err.mode = "unbiased";
      err.status = "error";
      err.note = "skipped: mask phase produced no mask";
      records.push_back(std::move(err));
      continue;
    }
    const EditMask unbiased_px = resize_mask(art.unbiased_mask, h, w);
    const EditMask biased_px =
        c.run_ablation ? resize_mask(art.biased_mask, h, w) : EditMask{};

    std::vector<Mean> combo_d(combos.size());
    std::vector<std::vector<size_t>> combo_rows(combos.size());
    std::vector<size_t> plain_row0(static_cast<size_t>(n_steps) * n_scales, SIZE_MAX);

    for (int si = 0; si < n_steps; ++si) {
      const int noise_step = c.noise_steps[si];
      if (log) *log << "[edit] " << tuple.name << " noise_step=" << noise_step << "\n";
      for (int trial = 0; trial < c.trials; ++trial) {
        const uint64_t enc_seed = derive_seed(
            c.seed, {kSeedEditEncode, ti, static_cast<uint64_t>(si), static_cast<uint64_t>(trial)});
        RandomStream enc_rng(enc_seed);
        EncodeResult enc;
        try {
          enc = dpm_encode(ctx.x0_src, tuple.c_source, den, sched, c.encode_scale, enc_rng,
                           noise_step);
          count_ok();
        } catch (const std::exception& e) {
          RunRecord err;
          err.tuple = tuple.name;
          err.phase = "edit";
          err.mode = "unbiased";
          err.features = features;
          err.noise_step = noise_step;
          err.trial = trial;
          err.seed = enc_seed;
          count_error(err, e);
          records.push_back(std::move(err));
          continue;
        }

        for (int ci = 0; ci < n_scales; ++ci) {
          const double scale = c.decode_scales[ci];
          RunRecord plain;
          plain.tuple = tuple.name;
          plain.phase = "edit";
          plain.mode = "plain";
          plain.dec_scale = scale;
          plain.noise_step = noise_step;
          plain.trial = trial;
          plain.seed = enc_seed;
          try {
            const ImageTensor x_plain = decode(enc.z, tuple.c_target, den, sched, scale);
            const ScoreReport score =
                score_edit(x_plain, ctx.x0_src, tuple.c_target, tuple.c_source, world);
            plain.psnr = score.psnr;
            plain.ssim = score.ssim;
            plain.align = score.align;
            plain.d_align = score.d_align;
            plain.psnr_outside = outside_psnr_or_nan(x_plain, ctx.x0_src, ctx);
            if (!std::isnan(plain.psnr_outside)) plain_pout.add(plain.psnr_outside);
            plain_d.add(score.d_align);
            if (trial == 0) plain_row0[static_cast<size_t>(si) * n_scales + ci] = records.size();
            records.push_back(std::move(plain));
            count_ok();
          } catch (const std::exception& e) {
            count_error(plain, e);
            records.push_back(std::move(plain));
          }

          for (int ki = 0; ki < n_ks; ++ki) {
            const int combo =
                combo_index[(static_cast<size_t>(si) * n_scales + ci) * n_ks + ki];
            if (combo < 0) continue;
            const int blend_step = c.blend_steps[ki];

            auto run_masked = [&](const char* mode, const EditMask& mask_px, uint64_t flavor) {
              const uint64_t blend_seed =
                  derive_seed(c.seed, {kSeedEditBlend, ti, static_cast<uint64_t>(si),
                                       static_cast<uint64_t>(trial), static_cast<uint64_t>(ci),
                                       static_cast<uint64_t>(ki), flavor});
              RandomStream blend_rng(blend_seed);
              RunRecord row;
              row.tuple = tuple.name;
              row.phase = "edit";
              row.mode = mode;
              row.features = features;
              row.dec_scale = scale;
              row.noise_step = noise_step;
              row.k = blend_step;
              row.trial = trial;
              row.seed = blend_seed;
              try {
                EditPlan plan;
                plan.c_target = tuple.c_target;
                plan.mask = mask_px;
                plan.blend_step = blend_step;
                plan.noise_step = noise_step;
                plan.guidance_scale = scale;
                plan.blend = c.blend_mode;
                const ImageTensor x_edit =
                    masked_edit(enc.z, enc.trajectory, plan, den, sched, &blend_rng);
                const ScoreReport score =
                    score_edit(x_edit, ctx.x0_src, tuple.c_target, tuple.c_source, world);
                row.psnr = score.psnr;
                row.ssim = score.ssim;
                row.align = score.align;
                row.d_align = score.d_align;
                row.psnr_outside = outside_psnr_or_nan(x_edit, ctx.x0_src, ctx);
                if (flavor == 0) {
                  if (!std::isnan(row.psnr_outside)) masked_pout.add(row.psnr_outside);
                  masked_d.add(score.d_align);
                  combo_d[combo].add(score.d_align);
                  combo_rows[combo].push_back(records.size());
                }
                records.push_back(std::move(row));
                count_ok();
              } catch (const std::exception& e) {
                count_error(row, e);
                records.push_back(std::move(row));
              }
            };

            run_masked("unbiased", unbiased_px, 0);
            if (c.run_ablation) run_masked("biased", biased_px, 1);
          }
        }
      }
    }

    // Per-tuple selection by mean d_align; ties keep the earliest combo.
    int best = -1;
    double best_value = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < combos.size(); ++i) {
      if (combo_d[i].n == 0) continue;
      const double v = combo_d[i].value();
      if (v > best_value) {
        best_value = v;
        best = static_cast<int>(i);
      }
    }
    if (best < 0) continue;
    const EditCombo sel = combos[best];
    art.selected_scale = c.decode_scales[sel.ci];
    art.selected_noise_step = c.noise_steps[sel.si];
    art.selected_blend_step = c.blend_steps[sel.ki];
    art.selected_d_align = best_value;
    for (size_t idx : combo_rows[best]) records[idx].selected = 1;

    if (ctx.dir.empty()) continue;
    // Regenerate the selected edit (trial 0) for the emitted image. Seeds are
    // pure functions of the indices, so this reproduces the recorded trial.
    try {
      RandomStream enc_rng(derive_seed(c.seed, {kSeedEditEncode, ti,
                                                static_cast<uint64_t>(sel.si), 0}));
      EncodeResult enc = dpm_encode(ctx.x0_src, tuple.c_source, den, sched, c.encode_scale,
                                    enc_rng, art.selected_noise_step);
      RandomStream blend_rng(
          derive_seed(c.seed, {kSeedEditBlend, ti, static_cast<uint64_t>(sel.si), 0,
                               static_cast<uint64_t>(sel.ci), static_cast<uint64_t>(sel.ki), 0}));
      EditPlan plan;
      plan.c_target = tuple.c_target;
      plan.mask = unbiased_px;
      plan.blend_step = art.selected_blend_step;
      plan.noise_step = art.selected_noise_step;
      plan.guidance_scale = art.selected_scale;
      plan.blend = c.blend_mode;
      const ImageTensor x_edit = masked_edit(enc.z, enc.trajectory, plan, den, sched, &blend_rng);
      write_png(x_edit, ctx.dir + "/edit_selected.png");
      for (size_t idx : combo_rows[best])
        if (records[idx].trial == 0) records[idx].file = ctx.rel_dir + "/edit_selected.png";

      const ImageTensor x_plain = decode(enc.z, tuple.c_target, den, sched, art.selected_scale);
      write_png(x_plain, ctx.dir + "/plain_selected.png");
      const size_t pidx = plain_row0[static_cast<size_t>(sel.si) * n_scales + sel.ci];
      if (pidx != SIZE_MAX) records[pidx].file = ctx.rel_dir + "/plain_selected.png";
    } catch (const std::exception& e) {
      RunRecord err;
      err.tuple = tuple.name;
      err.phase = "edit";
      err.mode = "unbiased";
      err.status = "error";
      err.note = std::string("selected-image regeneration: ") + e.what();
      records.push_back(std::move(err));
      result.all_ok = false;
    }
  }

  result.summary.biased_offtarget_iou = biased_iou.value();
  result.summary.unbiased_offtarget_iou = unbiased_iou.value();
  result.summary.plain_psnr_outside = plain_pout.value();
  result.summary.masked_psnr_outside = masked_pout.value();
  result.summary.plain_d_align = plain_d.value();
  result.summary.masked_d_align = masked_d.value();

  if (!out_root.empty()) write_records_csv(records, out_root + "/records.csv");
  return result;
}

std::string summary_csv(const std::vector<ModeSummaryRow>& rows) {
  std::string out =
      "mode,features,psnr,ssim,align,d_align,mask_area,offtarget_iou,psnr_outside,trials\n";
  for (const ModeSummaryRow& r : rows) {
    out += r.mode;
    out += ',';
    out += r.features;
    out += ',';
    out += format_double(r.psnr);
    out += ',';
    out += format_double(r.ssim);
    out += ',';
    out += format_double(r.align);
    out += ',';
    out += format_double(r.d_align);
    out += ',';
    out += format_double(r.mask_area);
    out += ',';
    out += format_double(r.offtarget_iou);
    out += ',';
    out += format_double(r.psnr_outside);
    out += ',';
    out += std::to_string(r.trials);
    out += '\n';
  }
  return out;
}

CompareResult compare_modes(const ExperimentConfig& cfg, std::ostream* log) {
  ExperimentConfig c = cfg;
  if (c.tuples.empty()) c.tuples = default_tuples();
  const NoiseSchedule sched = make_schedule(c.schedule);
  validate_sweep(c, sched);
  const MixtureWorld world = make_world(c.world);
  const AnalyticDenoiser den(world, sched);
  const std::string out_root = resolve_output_dir(c.output_dir);
  if (!out_root.empty()) std::filesystem::create_directories(out_root);

  CompareResult result;

  std::vector<TupleContext> ctxs;
  for (const EditTuple& tuple : c.tuples)
    ctxs.push_back(make_context(tuple, world.vocabulary(), /*out_root=*/""));

  const PatchStatsExtractor stats(c.mask.grid_rows, c.mask.grid_cols);
  const PatchMeanExtractor means(c.mask.grid_rows, c.mask.grid_cols);
  // Cell order fixes the summary row order: mask pair source x feature set.
  struct Cell {
    const char* mode;
    const char* features;
    bool biased;
    const FeatureExtractor* extractor;
  };
  const std::array<Cell, 4> cells = {{{"biased", "stats", true, &stats},
                                      {"biased", "means", true, &means},
                                      {"unbiased", "stats", false, &stats},
                                      {"unbiased", "means", false, &means}}};

  const int n_scales = static_cast<int>(c.decode_scales.size());
  const int n_steps = static_cast<int>(c.noise_steps.size());
  const int n_ks = static_cast<int>(c.blend_steps.size());
  const int h = world.height(), w = world.width();

  // ---- Masks for every cell, from shared cycles ----
  std::array<Mean, 4> cell_iou;
  std::vector<std::array<std::vector<EditMask>, 4>> per_tuple_masks(ctxs.size());
  for (size_t ti = 0; ti < ctxs.size(); ++ti) {
    const TupleContext& ctx = ctxs[ti];
    const EditTuple& tuple = *ctx.tuple;
    if (log) *log << "[ablate:mask] " << tuple.name << "\n";
    for (int si = 0; si < n_steps; ++si)
      for (int ci = 0; ci < n_scales; ++ci)
        for (int trial = 0; trial < c.trials; ++trial) {
          const uint64_t combo = static_cast<uint64_t>(si) * n_scales + ci;
          RandomStream rng(
              derive_seed(c.seed, {kSeedMaskPhase, ti, combo, static_cast<uint64_t>(trial)}));
          try {
            CycleOutput cyc =
                be_cycle(ctx.x0_src, tuple.c_source, tuple.c_target, den, sched, c.encode_scale,
                         c.decode_scales[ci], c.noise_steps[si], rng);
            for (size_t cell = 0; cell < cells.size(); ++cell) {
              const ImageTensor& first = cells[cell].biased ? ctx.x0_src : cyc.x0_inv;
              EditMask m = grid_refine(first, cyc.x0_target, *cells[cell].extractor, c.mask.delta,
                                       c.mask.mode);
              cell_iou[cell].add(mask_region_iou(resize_mask(m, h, w), ctx.offtarget_px));
              per_tuple_masks[ti][cell].push_back(std::move(m));
            }
          } catch (const std::exception&) {
            result.all_ok = false;
          }
        }
  }

  std::vector<std::array<EditMask, 4>> avg_px(ctxs.size());
  std::array<Mean, 4> cell_area;
  for (size_t ti = 0; ti < ctxs.size(); ++ti)
    for (size_t cell = 0; cell < cells.size(); ++cell) {
      if (per_tuple_masks[ti][cell].empty()) continue;
      const EditMask avg = average_masks(per_tuple_masks[ti][cell], c.mask.vote_threshold);
      cell_area[cell].add(mask_area_fraction(avg));
      avg_px[ti][cell] = resize_mask(avg, h, w);
    }

  // ---- Masked edits per cell over the full sweep ----
  std::array<Mean, 4> cell_psnr, cell_ssim, cell_align, cell_d, cell_pout;
  Mean sd_psnr, sd_ssim, sd_align, sd_d, sd_pout;
  Mean de_psnr, de_ssim, de_align, de_d, de_pout, de_iou, de_area;
  long sd_n = 0, de_n = 0;
  std::array<long, 4> cell_n = {0, 0, 0, 0};

  for (size_t ti = 0; ti < ctxs.size(); ++ti) {
    const TupleContext& ctx = ctxs[ti];
    const EditTuple& tuple = *ctx.tuple;
    if (log) *log << "[ablate:edit] " << tuple.name << "\n";
    for (int si = 0; si < n_steps; ++si) {
      const int noise_step = c.noise_steps[si];
      for (int trial = 0; trial < c.trials; ++trial) {
        RandomStream enc_rng(derive_seed(
            c.seed, {kSeedEditEncode, ti, static_cast<uint64_t>(si), static_cast<uint64_t>(trial)}));
        EncodeResult enc;
        try {
          enc = dpm_encode(ctx.x0_src, tuple.c_source, den, sched, c.encode_scale, enc_rng,
                           noise_step);
        } catch (const std::exception&) {
          result.all_ok = false;
          continue;
        }

        // DiffEdit-style baseline: contrast mask once per (step, trial),
        // masked edit per scale with the blend starting at the noise step.
        EditMask de_mask_px;
        bool have_de_mask = false;
        if (c.run_baselines) {
          RandomStream de_rng(derive_seed(
              c.seed, {kSeedDiffedit, ti, static_cast<uint64_t>(si), static_cast<uint64_t>(trial)}));
          try {
            const EditMask de_mask =
                contrast_mask(ctx.x0_src, tuple.c_source, tuple.c_target, noise_step,
                              2 * c.mask.grid_rows, 2 * c.mask.grid_cols, 8, den, sched, de_rng);
            de_iou.add(mask_region_iou(resize_mask(de_mask, h, w), ctx.offtarget_px));
            de_area.add(mask_area_fraction(de_mask));
            de_mask_px = resize_mask(de_mask, h, w);
            have_de_mask = true;
          } catch (const std::exception&) {
            result.all_ok = false;
          }
        }

        for (int ci = 0; ci < n_scales; ++ci) {
          const double scale = c.decode_scales[ci];

          if (c.run_baselines) {
            RandomStream sd_rng(derive_seed(
                c.seed, {kSeedSdedit, ti, static_cast<uint64_t>(si), static_cast<uint64_t>(ci),
                         static_cast<uint64_t>(trial)}));
            try {
              const ImageTensor x = sdedit_edit(ctx.x0_src, tuple.c_target, noise_step, scale, den,
                                                sched, sd_rng);
              const ScoreReport s =
                  score_edit(x, ctx.x0_src, tuple.c_target, tuple.c_source, world);
              sd_psnr.add(s.psnr);
              sd_ssim.add(s.ssim);
              sd_align.add(s.align);
              sd_d.add(s.d_align);
              const double pout = outside_psnr_or_nan(x, ctx.x0_src, ctx);
              if (!std::isnan(pout)) sd_pout.add(pout);
              ++sd_n;
            } catch (const std::exception&) {
              result.all_ok = false;
            }

            if (have_de_mask) {
              RandomStream blend_rng(derive_seed(
                  c.seed, {kSeedDiffedit, ti, static_cast<uint64_t>(si),
                           static_cast<uint64_t>(trial), static_cast<uint64_t>(ci)}));
              try {
                EditPlan plan;
                plan.c_target = tuple.c_target;
                plan.mask = de_mask_px;
                plan.blend_step = noise_step;
                plan.noise_step = noise_step;
                plan.guidance_scale = scale;
                plan.blend = c.blend_mode;
                const ImageTensor x =
                    masked_edit(enc.z, enc.trajectory, plan, den, sched, &blend_rng);
                const ScoreReport s =
                    score_edit(x, ctx.x0_src, tuple.c_target, tuple.c_source, world);
                de_psnr.add(s.psnr);
                de_ssim.add(s.ssim);
                de_align.add(s.align);
                de_d.add(s.d_align);
                const double pout = outside_psnr_or_nan(x, ctx.x0_src, ctx);
                if (!std::isnan(pout)) de_pout.add(pout);
                ++de_n;
              } catch (const std::exception&) {
                result.all_ok = false;
              }
            }
          }

          for (int ki = 0; ki < n_ks; ++ki) {
            const int blend_step = c.blend_steps[ki];
            if (blend_step > noise_step) continue;
            for (size_t cell = 0; cell < cells.size(); ++cell) {
              if (avg_px[ti][cell].values.empty()) continue;
              RandomStream blend_rng(derive_seed(
                  c.seed, {kSeedCellEdit, cell, ti, static_cast<uint64_t>(si),
                           static_cast<uint64_t>(trial), static_cast<uint64_t>(ci),
                           static_cast<uint64_t>(ki)}));
              try {
                EditPlan plan;
                plan.c_target = tuple.c_target;
                plan.mask = avg_px[ti][cell];
                plan.blend_step = blend_step;
                plan.noise_step = noise_step;
                plan.guidance_scale = scale;
                plan.blend = c.blend_mode;
                const ImageTensor x =
                    masked_edit(enc.z, enc.trajectory, plan, den, sched, &blend_rng);
                const ScoreReport s =
                    score_edit(x, ctx.x0_src, tuple.c_target, tuple.c_source, world);
                cell_psnr[cell].add(s.psnr);
                cell_ssim[cell].add(s.ssim);
                cell_align[cell].add(s.align);
                cell_d[cell].add(s.d_align);
                const double pout = outside_psnr_or_nan(x, ctx.x0_src, ctx);
                if (!std::isnan(pout)) cell_pout[cell].add(pout);
                ++cell_n[cell];
              } catch (const std::exception&) {
                result.all_ok = false;
              }
            }
          }
        }
      }
    }
  }

  for (size_t cell = 0; cell < cells.size(); ++cell) {
    ModeSummaryRow row;
    row.mode = cells[cell].mode;
    row.features = cells[cell].features;
    row.psnr = cell_psnr[cell].value();
    row.ssim = cell_ssim[cell].value();
    row.align = cell_align[cell].value();
    row.d_align = cell_d[cell].value();
    row.mask_area = cell_area[cell].value();
    row.offtarget_iou = cell_iou[cell].value();
    row.psnr_outside = cell_pout[cell].value();
    row.trials = static_cast<int>(cell_n[cell]);
    result.rows.push_back(std::move(row));
  }
  if (c.run_baselines) {
    ModeSummaryRow sd;
    sd.mode = "sdedit";
    sd.psnr = sd_psnr.value();
    sd.ssim = sd_ssim.value();
    sd.align = sd_align.value();
    sd.d_align = sd_d.value();
    sd.psnr_outside = sd_pout.value();
    sd.trials = static_cast<int>(sd_n);
    result.rows.push_back(std::move(sd));

    ModeSummaryRow de;
    de.mode = "diffedit";
    de.psnr = de_psnr.value();
    de.ssim = de_ssim.value();
    de.align = de_align.value();
    de.d_align = de_d.value();
    de.mask_area = de_area.value();
    de.offtarget_iou = de_iou.value();
    de.psnr_outside = de_pout.value();
    de.trials = static_cast<int>(de_n);
    result.rows.push_back(std::move(de));
  }

  if (!out_root.empty()) {
    std::ofstream out(out_root + "/summary.csv", std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + out_root + "/summary.csv for writing");
    out << summary_csv(result.rows);
    if (!out) throw std::runtime_error("short write to " + out_root + "/summary.csv");
  }
  return result;
}

}  // namespace dualcycle
