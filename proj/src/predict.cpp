#include "astprobe/predict.hpp"

#include "astprobe/binarize.hpp"
#include "astprobe/errors.hpp"

namespace astprobe {

template <typename T>
TupleDCU predict_tuple(const ProbeParams<T>& params, const Matrix<T>& words) {
  const ProbeOutput<T> out = forward(params, words);
  TupleDCU tuple;
  tuple.d.assign(out.distances.data(), out.distances.data() + out.distances.size());
  tuple.c.reserve(static_cast<std::size_t>(out.c_logits.rows()));
  for (Eigen::Index i = 0; i < out.c_logits.rows(); ++i)
    tuple.c.push_back(static_cast<LabelId>(leftmost_argmax(out.c_logits.row(i))));
  tuple.u.reserve(static_cast<std::size_t>(out.u_logits.rows()));
  for (Eigen::Index i = 0; i < out.u_logits.rows(); ++i)
    tuple.u.push_back(static_cast<LabelId>(leftmost_argmax(out.u_logits.row(i))));
  return tuple;
}

template <typename T>
Ast predict_ast(const ProbeParams<T>& params, const Matrix<T>& words, const LabelVocab& c_vocab,
                const LabelVocab& u_vocab, std::span<const std::string> tokens) {
  if (static_cast<std::size_t>(params.c_protos.rows()) != c_vocab.size() ||
      static_cast<std::size_t>(params.u_protos.rows()) != u_vocab.size()) {
    throw DimensionError("probe prototypes do not match vocabulary sizes");
  }
  const TupleDCU tuple = predict_tuple(params, words);
  return unbinarize(tuple_to_tree(tuple.d, tuple.c, tuple.u, c_vocab, u_vocab, tokens));
}

template TupleDCU predict_tuple<float>(const ProbeParams<float>&, const Matrix<float>&);
template TupleDCU predict_tuple<double>(const ProbeParams<double>&, const Matrix<double>&);
template Ast predict_ast<float>(const ProbeParams<float>&, const Matrix<float>&,
                                const LabelVocab&, const LabelVocab&,
                                std::span<const std::string>);
template Ast predict_ast<double>(const ProbeParams<double>&, const Matrix<double>&,
                                 const LabelVocab&, const LabelVocab&,
                                 std::span<const std::string>);

}  // namespace astprobe
