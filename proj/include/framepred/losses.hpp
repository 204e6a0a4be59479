#pragma once

#include <vector>

#include "framepred/model.hpp"

namespace framepred {

/// Weights of the combined training objective
/// lambda_adv * L_adv + lambda_lp * L_p + lambda_gdl * L_gdl.
struct LossWeights {
  double lambda_adv = 0.0;
  double lambda_lp = 1.0;
  double lambda_gdl = 0.0;
  int p = 2;      // 1 or 2
  int alpha = 1;  // >= 1
  void validate() const;
};

/// Sum over elements of |pred - target|^p, averaged over batch items.
/// For p = 1 the subgradient at zero difference is 0.
template <typename T>
Var<T> lp_loss(Graph<T>& g, Var<T> pred, const Tensor<T>& target, int p);

/// Gradient difference loss: for every horizontal and vertical neighbor pair
/// that exists, | |grad target| - |grad pred| |^alpha, summed and averaged
/// over batch items. Forward differences only; no padding.
template <typename T>
Var<T> gdl_loss(Graph<T>& g, Var<T> pred, const Tensor<T>& target, int alpha);

/// Binary cross-entropy, mean over batch items. Predictions are clamped to
/// [1e-7, 1 - 1e-7] before the logs; targets must be exactly 0 or 1.
template <typename T>
Var<T> bce_loss(Graph<T>& g, Var<T> pred, const std::vector<T>& targets);
template <typename T>
Var<T> bce_loss(Graph<T>& g, Var<T> pred, T target);

/// Discriminator objective: per scale, BCE(D_k(X_k, Y_k), 1) +
/// BCE(D_k(X_k, generated_k), 0). `generated` holds detached prediction
/// values, so the only gradients produced are the discriminator's.
template <typename T>
Var<T> adv_d_loss(Graph<T>& g, const DiscriminatorSpec& spec,
                  const ScaleConfig& sc, ParamStore<T>& d_params,
                  const Pyramid<T>& pyramid,
                  const std::vector<Tensor<T>>& generated);

/// Generator-side adversarial objective: per scale, BCE(D_k(X_k, Yhat_k), 1)
/// with the discriminator weights frozen. `generated` are live graph nodes,
/// so gradients flow back into whatever produced them.
template <typename T>
Var<T> adv_g_loss(Graph<T>& g, const DiscriminatorSpec& spec,
                  const ScaleConfig& sc, ParamStore<T>& d_params,
                  const Pyramid<T>& pyramid,
                  const std::vector<Var<T>>& generated);

/// Unweighted values of the individual terms, for logging.
struct CombinedTerms {
  double lp = 0;
  double gdl = 0;
  double adv = 0;
  double total = 0;
};

/// Weighted total. The lp and GDL terms are summed over every scale between
/// the prediction and the pyramid target. Terms with zero weight are skipped
/// entirely. The adversarial term requires d_spec/d_params.
template <typename T>
Var<T> combined_loss(Graph<T>& g, const LossWeights& weights,
                     const DiscriminatorSpec* d_spec, const ScaleConfig& sc,
                     ParamStore<T>* d_params, const Pyramid<T>& pyramid,
                     const std::vector<Var<T>>& generated,
                     CombinedTerms* terms = nullptr);

// Value-only conveniences (used by metrics-style callers and the bindings).
template <typename T>
T lp_loss_value(const Tensor<T>& pred, const Tensor<T>& target, int p);
template <typename T>
T gdl_loss_value(const Tensor<T>& pred, const Tensor<T>& target, int alpha);
template <typename T>
T bce_loss_value(const std::vector<T>& pred, const std::vector<T>& targets);

extern template Var<float> lp_loss(Graph<float>&, Var<float>,
                                   const Tensor<float>&, int);
extern template Var<double> lp_loss(Graph<double>&, Var<double>,
                                    const Tensor<double>&, int);
extern template Var<float> gdl_loss(Graph<float>&, Var<float>,
                                    const Tensor<float>&, int);
extern template Var<double> gdl_loss(Graph<double>&, Var<double>,
                                     const Tensor<double>&, int);
extern template Var<float> bce_loss(Graph<float>&, Var<float>,
                                    const std::vector<float>&);
extern template Var<double> bce_loss(Graph<double>&, Var<double>,
                                     const std::vector<double>&);
extern template Var<float> bce_loss(Graph<float>&, Var<float>, float);
extern template Var<double> bce_loss(Graph<double>&, Var<double>, double);
extern template Var<float> adv_d_loss(Graph<float>&, const DiscriminatorSpec&,
                                      const ScaleConfig&, ParamStore<float>&,
                                      const Pyramid<float>&,
                                      const std::vector<Tensor<float>>&);
extern template Var<double> adv_d_loss(Graph<double>&, const DiscriminatorSpec&,
                                       const ScaleConfig&, ParamStore<double>&,
                                       const Pyramid<double>&,
                                       const std::vector<Tensor<double>>&);
extern template Var<float> adv_g_loss(Graph<float>&, const DiscriminatorSpec&,
                                      const ScaleConfig&, ParamStore<float>&,
                                      const Pyramid<float>&,
                                      const std::vector<Var<float>>&);
extern template Var<double> adv_g_loss(Graph<double>&, const DiscriminatorSpec&,
                                       const ScaleConfig&, ParamStore<double>&,
                                       const Pyramid<double>&,
                                       const std::vector<Var<double>>&);
extern template Var<float> combined_loss(Graph<float>&, const LossWeights&,
                                         const DiscriminatorSpec*,
                                         const ScaleConfig&, ParamStore<float>*,
                                         const Pyramid<float>&,
                                         const std::vector<Var<float>>&,
                                         CombinedTerms*);
extern template Var<double> combined_loss(Graph<double>&, const LossWeights&,
                                          const DiscriminatorSpec*,
                                          const ScaleConfig&,
                                          ParamStore<double>*,
                                          const Pyramid<double>&,
                                          const std::vector<Var<double>>&,
                                          CombinedTerms*);
extern template float lp_loss_value(const Tensor<float>&, const Tensor<float>&,
                                    int);
extern template double lp_loss_value(const Tensor<double>&,
                                     const Tensor<double>&, int);
extern template float gdl_loss_value(const Tensor<float>&, const Tensor<float>&,
                                     int);
extern template double gdl_loss_value(const Tensor<double>&,
                                      const Tensor<double>&, int);
extern template float bce_loss_value(const std::vector<float>&,
                                     const std::vector<float>&);
extern template double bce_loss_value(const std::vector<double>&,
                                      const std::vector<double>&);

}  // namespace framepred
