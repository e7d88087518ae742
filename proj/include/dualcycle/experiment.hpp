#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "dualcycle/config.hpp"
#include "dualcycle/cycles.hpp"
#include "dualcycle/editing.hpp"
#include "dualcycle/metrics.hpp"

namespace dualcycle {

// One CSV row. Numeric fields that do not apply to a row hold NaN (doubles)
// or -1 (integers) and are written as empty cells, so the schema is one flat
// table across phases.
struct RunRecord {
  std::string tuple;
  std::string phase;     // render | cycle | mask | edit | baseline
  std::string mode;      // source | plain | inverted | biased | unbiased | sdedit | diffedit
  std::string features;  // stats | means | "" when no mask is involved
  double dec_scale = 0.0;
  int noise_step = -1;
  int k = -1;
  int trial = -1;  // -1 on rows aggregated over trials
  uint64_t seed = 0;
  std::string status = "ok";  // ok | error
  double psnr = 0.0, ssim = 0.0, align = 0.0, d_align = 0.0;
  double mask_area = 0.0, offtarget_iou = 0.0, psnr_outside = 0.0;
  int selected = 0;
  std::string file;  // emitted artifact path relative to the output root
  std::string note;  // error message on status = error

  RunRecord();  // initializes the double fields to NaN
};

// Column order is fixed; see records_csv_header(). Floats are printed with
// %.9g, so equal values always produce equal bytes.
std::string records_csv_header();
std::string record_to_csv(const RunRecord& r);
void write_records_csv(const std::vector<RunRecord>& records, const std::string& path);

// Means over trials that completed (status ok). NaN when nothing contributed.
struct ExperimentSummary {
  double biased_offtarget_iou = 0.0;    // per-trial biased masks vs the unbound-attribute region
  double unbiased_offtarget_iou = 0.0;  // same for unbiased masks
  double plain_psnr_outside = 0.0;      // plain decodes, pixels outside the intended edit region
  double masked_psnr_outside = 0.0;     // masked edits, same pixels
  double plain_d_align = 0.0;
  double masked_d_align = 0.0;
  int ok_trials = 0;
  int error_trials = 0;

  ExperimentSummary();
};

struct TupleArtifacts {
  std::string name;
  EditMask biased_mask;    // cell grid, averaged over all combinations and trials
  EditMask unbiased_mask;  // ditto
  // Hyperparameters of the edit selected by mean d_align (ties: first in
  // enumeration order, noise_step outermost then scale then blend step).
  double selected_scale = 0.0;
  int selected_noise_step = -1;
  int selected_blend_step = -1;
  double selected_d_align = 0.0;
};

struct ExperimentResult {
  std::vector<RunRecord> records;
  ExperimentSummary summary;
  std::vector<TupleArtifacts> tuples;
  bool all_ok = true;  // false when any trial recorded an error
};

// Output directory resolution: empty disables all file output; a relative
// path is placed under $DUALCYCLE_OUTPUT_ROOT when that variable is set.
std::string resolve_output_dir(const std::string& output_dir);

// The full measurement protocol. Per tuple and per (decode scale, noise
// step) combination it runs `trials` independent dual cycles, derives the
// biased (source vs target) and unbiased (inverted vs target) masks from
// each, and averages the per-trial masks into one mask per flavor. It then
// sweeps (scale, noise step, blend step) running the masked edit with the
// averaged unbiased mask against a fresh per-trial encode, scores everything
// against the analytic world, and selects the best combination per tuple by
// mean d_align. Images, masks, and records.csv land under the resolved
// output directory.
//
// Trial seeds are pure functions of (config seed, tuple index, phase,
// hyperparameter indices, trial index), so runs with equal config and seed
// produce byte-identical outputs. A trial that throws is recorded as an
// error row and the run continues.
ExperimentResult run_experiment(const ExperimentConfig& cfg, std::ostream* log = nullptr);

// One row of the mode-comparison table: means over tuples, combinations,
// and trials.
struct ModeSummaryRow {
  std::string mode;      // biased | unbiased | sdedit | diffedit
  std::string features;  // stats | means | ""
  double psnr = 0.0, ssim = 0.0, align = 0.0, d_align = 0.0;
  double mask_area = 0.0, offtarget_iou = 0.0, psnr_outside = 0.0;
  int trials = 0;  // contributing (ok) measurements

  ModeSummaryRow();
};

struct CompareResult {
  std::vector<ModeSummaryRow> rows;
  bool all_ok = true;
};

// Head-to-head ablation: masked edits driven by each mask flavor (biased or
// unbiased source pair) x feature set (full patch stats or means only), plus
// two reference baselines when cfg.run_baselines is set: a forward-noise +
// conditional-decode edit with no encoder (sdedit) and a masked edit whose
// mask comes from contrasting noise predictions under the two conditions
// (diffedit). Writes summary.csv under the resolved output directory.
CompareResult compare_modes(const ExperimentConfig& cfg, std::ostream* log = nullptr);

std::string summary_csv(const std::vector<ModeSummaryRow>& rows);

// Ground-truth regions derived from a tuple, each as a 0/1 pixel map over
// the source canvas:
//   edit_region      pixels of attributes the target condition changes
//                    relative to the source scene (what the edit must touch)
//   offtarget_region pixels of attributes bound in neither condition (where
//                    nothing should change, so mask overlap here is leakage)
std::vector<uint8_t> edit_region(const EditTuple& tuple);
std::vector<uint8_t> offtarget_region(const EditTuple& tuple, const Vocabulary& vocabulary);

// Baseline: noise the source to noise_step, then run the plain stochastic
// conditional decode under c at the given scale. No encoding involved, so
// nothing ties the result to the source outside what the noise retains.
ImageTensor sdedit_edit(const ImageTensor& x0, const Condition& c, int noise_step, double scale,
                        const Denoiser& den, const NoiseSchedule& sched, RandomStream& rng);

// Baseline mask: average |implied-noise difference| between the two
// conditions over `draws` forward samples at step noise_step / 2, reduced to
// cell means, min-max normalized, and thresholded at 0.5.
EditMask contrast_mask(const ImageTensor& x0, const Condition& c_src, const Condition& c_tgt,
                       int noise_step, int rows, int cols, int draws, const Denoiser& den,
                       const NoiseSchedule& sched, RandomStream& rng);

}  // namespace dualcycle
