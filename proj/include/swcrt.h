/* C interface to the stepped-wedge trial design and analysis engine.
 *
 * Every function returns a status code (SWCRT_OK on success); on failure
 * swcrt_last_error() describes the problem for the calling thread.  Strings
 * returned through char** are heap-allocated and must be released with
 * swcrt_string_free(); layouts must be released with swcrt_layout_free().
 *
 * Models are named by string: "hh", "hh-ant", "eti", "eti-ant" (case
 * insensitive).  True data-generating models are passed as the JSON object
 * documented for the fit and simulate tools, e.g.
 *   {"model":"hh-ant","delta":0.075,"gamma":0.04,"tau_sq":0.02,"sigma_sq":1}.
 */
#ifndef SWCRT_H
#define SWCRT_H

#ifdef __cplusplus
extern "C" {
#endif

enum {
  SWCRT_OK = 0,
  SWCRT_E_CONFIG = 2,      /* invalid argument or configuration */
  SWCRT_E_RANK = 3,        /* singular information / rank-deficient design */
  SWCRT_E_CONVERGENCE = 4, /* optimizer or search failed */
  SWCRT_E_IO = 5           /* malformed input text */
};

/* Trial layout: periods, cell size, anticipation window, and the adoption
 * period and cluster count of each sequence. */
typedef struct swcrt_layout swcrt_layout;

/* Message for the most recent failing call on this thread; never NULL. */
const char* swcrt_last_error(void);
void swcrt_string_free(char* text);

/* Complete design: J-1 sequences of I/(J-1) clusters adopting one period
 * apart, K individuals per cluster-period, ell-period anticipation window. */
int swcrt_layout_standard(int clusters, int periods, int individuals, int ell,
                          swcrt_layout** out);
/* General design from parallel arrays of adoption periods and cluster
 * counts. */
int swcrt_layout_custom(const int* adopt, const int* count, int n_sequences,
                        int periods, int individuals, int ell,
                        swcrt_layout** out);
/* {"I":..,"J":..,"K":..,"ell":..,"sequences":[{"adopt":..,"count":..},..]};
 * "sequences" may be omitted for a standard design. */
int swcrt_layout_from_json(const char* json, swcrt_layout** out);
void swcrt_layout_free(swcrt_layout* layout);

int swcrt_layout_json(const swcrt_layout* layout, char** out);
/* Long-format indicator table: cluster,period,Z,A,s. */
int swcrt_indicators_csv(const swcrt_layout* layout, char** out);
/* Indicator-sum constants entering the closed-form variances. */
int swcrt_design_constants_json(const swcrt_layout* layout, char** out);

/* Correlation of cluster-period means implied by an intraclass correlation
 * and cell size: phi = K rho / (K rho + 1 - rho). */
int swcrt_phi_from_icc(double rho, int individuals, double* out);

/* Closed-form misspecification weights on the standard design.  Scenarios:
 *   "hh-under-hhant"   omega for an ell-period window (pass ell, phi, Q)
 *   "hh-under-etiant"  per-exposure-time pi and omega vectors (ell = 1)
 *   "hhant-under-eti"  per-exposure-time pi and psi vectors (ell = 1)
 *   "eti-j3"           gamma loadings of the J=3 exposure-time fits
 * Q = J-1 is the sequence count. */
int swcrt_bias_json(const char* scenario, int Q, double phi, int ell,
                    char** out);
/* Weight-grid export: CSV Q,phi,j,weight_name,value over the given axes. */
int swcrt_bias_grid_csv(const int* Qs, int n_q, const double* phis, int n_phi,
                        char** out);

/* Expected value of every estimator of `working_model` when the data follow
 * `truth_json`, at mean-correlation phi.  Closed forms where a theorem
 * applies, the exact projection oracle otherwise. */
int swcrt_expectation_json(const swcrt_layout* layout,
                           const char* working_model, const char* truth_json,
                           double phi, char** out);

/* Variance of the reported treatment-effect estimator (the exposure-time
 * average for eti models).  rho is the intraclass correlation and sigma_sq
 * the residual variance, so the total variance is sigma_sq/(1-rho). */
int swcrt_variance_json(const swcrt_layout* layout, const char* model,
                        double rho, double sigma_sq, char** out);
/* Two-tailed Wald power at the given alternative effect. */
int swcrt_power(const swcrt_layout* layout, const char* model, double rho,
                double sigma_sq, double effect, double alpha, double* out);
/* Smallest effect detected with the target power. */
int swcrt_detectable_effect(const swcrt_layout* layout, const char* model,
                            double rho, double sigma_sq, double target_power,
                            double alpha, double* out);
/* Minimal cluster count (vary = 'I', standard designs) or cell size
 * (vary = 'K') reaching the target power; fails with SWCRT_E_CONVERGENCE
 * when the cap is not enough. */
int swcrt_sample_size(const swcrt_layout* layout, const char* model,
                      double rho, double sigma_sq, double effect,
                      double target_power, double alpha, char vary, int cap,
                      int* value_out, double* power_out);

/* Power comparison of two working models under a common truth family with
 * anticipation gamma = ratio * effect.  CSV rows
 * param1,param2,power_A,power_B,ratio,valid over (rhos x ratios); valid is 0
 * where a compared model's test does not keep its level under the null. */
int swcrt_power_grid_csv(const swcrt_layout* layout, const char* model_a,
                         const char* model_b, const char* truth_family,
                         const double* rhos, int n_rho, const double* ratios,
                         int n_ratio, double effect, double sigma_sq,
                         double alpha, char** out);

/* One replication's individual-level dataset:
 * cluster,period,individual,Z,A,y.  Byte-identical for equal inputs. */
int swcrt_dataset_csv(const swcrt_layout* layout, const char* truth_json,
                      unsigned long long seed, unsigned long long rep,
                      char** out);
/* Replicated study: fits each comma-separated working model to every
 * replication and summarizes estimates, coverage and rejection rates.
 * precision is the printed significant digits; as_json selects JSON over
 * CSV. */
int swcrt_study_report(const swcrt_layout* layout, const char* truth_json,
                       const char* working_models, int reps,
                       unsigned long long seed, double alpha, int precision,
                       int as_json, char** out);

/* Named replication scenarios "I-null", "I", "II", "III", "IV". */
int swcrt_preset_layout(const char* name, swcrt_layout** out);
int swcrt_preset_truth_json(const char* name, char** out);
int swcrt_preset_working_models(const char* name, char** out);

/* Fit one working model to a long-format dataset; the layout (adoption
 * periods, cell size, anticipation window) is reconstructed from the Z and A
 * columns.  use_reml = 0 switches to maximum likelihood.  with_lrt adds the
 * likelihood-ratio test of a constant effect against exposure-time
 * heterogeneity (anticipation-adjusted when the model has the term). */
int swcrt_fit_json(const char* dataset_csv, const char* model, int use_reml,
                   int with_lrt, char** out);

#ifdef __cplusplus
}
#endif

#endif /* SWCRT_H */
