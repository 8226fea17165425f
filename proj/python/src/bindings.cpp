#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fae/checkpoint.hpp"
#include "fae/dataset.hpp"
#include "fae/errors.hpp"
#include "fae/evaluation.hpp"
#include "fae/extra_trees.hpp"
#include "fae/hfae.hpp"
#include "fae/pipeline.hpp"
#include "fae/rng.hpp"
#include "fae/trainer.hpp"

namespace py = pybind11;
using namespace fae;

namespace {

Hyperparams make_hp(Index k, Index d, double lambda1, double lambda2, double lr, int epochs, Index batch,
                    std::uint64_t seed, const std::string& l1_mode, bool restore_best) {
  Hyperparams hp;
  hp.k = k;
  hp.d = d;
  hp.lambda1 = lambda1;
  hp.lambda2 = lambda2;
  hp.lr = lr;
  hp.epochs = epochs;
  hp.batch = batch;
  hp.seed = seed;
  hp.l1_mode = parse_l1_mode(l1_mode);
  hp.restore_best = restore_best;
  return hp;
}

SelectionResult selection_of(const std::vector<Index>& indices) {
  SelectionResult s;
  s.indices = indices;
  s.weights.assign(indices.size(), 1.0);
  return s;
}

py::dict report_dict(const TrainReport& r) {
  py::list epochs;
  for (const auto& e : r.epochs) {
    py::dict row;
    row["epoch"] = e.epoch;
    row["terms"] = e.terms;
    row["l1"] = e.l1;
    row["total"] = e.total;
    row["val_total"] = e.val_total;
    epochs.append(row);
  }
  py::dict out;
  out["epochs"] = epochs;
  out["best_epoch"] = r.best_epoch;
  out["initial_train_total"] = r.initial_train_total;
  out["initial_val_total"] = r.initial_val_total;
  out["wall_seconds"] = r.wall_seconds;
  return out;
}

py::dict checkpoint_dict(const Checkpoint& c) {
  py::dict out;
  out["method"] = c.method;
  out["w"] = c.params.w;
  out["enc"] = c.params.ed.enc;
  out["dec"] = c.params.ed.dec;
  out["k"] = c.hp.k;
  out["seed"] = c.hp.seed;
  out["epoch"] = c.epoch;
  py::list groups;
  for (const auto& g : checkpoint_selections(c)) groups.append(g.indices);
  out["selections"] = groups;
  return out;
}

py::dict dataset_dict(const Dataset& d) {
  py::dict out;
  out["x"] = d.x;
  out["labels"] = d.labels ? py::cast(*d.labels) : py::none();
  out["feature_names"] = d.feature_names;
  out["source"] = d.provenance.source;
  out["missing_cells"] = d.provenance.missing_cells;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Linear fractal autoencoders for unsupervised feature selection";
  m.attr("__version__") = FAE_VERSION;

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);

  m.def(
      "topk_mask",
      [](const Vector& w, Index k) {
        const SelectionResult s = topk_mask(w, k);
        return py::make_tuple(s.indices, s.weights);
      },
      py::arg("w"), py::arg("k"), "Indices and weights of the k largest entries (ties to the lower index).");

  m.def(
      "hierarchical_masks",
      [](const Vector& w, Index h, Index k) {
        HierarchyParams hp;
        hp.h = h;
        hp.k = k;
        hp.lambdas.assign(static_cast<std::size_t>(h), 1.0);
        std::vector<std::vector<Index>> groups;
        for (const auto& g : hierarchical_masks(w, hp).groups) groups.push_back(g.indices);
        return groups;
      },
      py::arg("w"), py::arg("h"), py::arg("k"));

  m.def(
      "fae_objective",
      [](const Matrix& x, const Vector& w, const Matrix& enc, const Matrix& dec, Index k, double lambda1,
         double lambda2, const std::string& l1_mode) {
        const Hyperparams hp = make_hp(k, 0, lambda1, lambda2, 1e-3, 0, 0, 0, l1_mode, true);
        const ObjectiveBreakdown b = fae_objective(x, w, EncoderDecoder{enc, dec}, hp);
        py::dict out;
        out["full_recon"] = b.full_recon;
        out["selected_recon"] = b.selected_recon;
        out["l1"] = b.l1;
        out["total"] = b.total;
        return out;
      },
      py::arg("x"), py::arg("w"), py::arg("enc"), py::arg("dec"), py::arg("k"), py::arg("lambda1") = 2.0,
      py::arg("lambda2") = 0.1, py::arg("l1_mode") = "mean");

  m.def(
      "fae_gradients",
      [](const Matrix& x, const Vector& w, const Matrix& enc, const Matrix& dec, Index k, double lambda1,
         double lambda2, const std::string& l1_mode) {
        const Hyperparams hp = make_hp(k, 0, lambda1, lambda2, 1e-3, 0, 0, 0, l1_mode, true);
        const Gradients g = fae_gradients(x, w, EncoderDecoder{enc, dec}, hp);
        return py::make_tuple(g.w, g.enc, g.dec);
      },
      py::arg("x"), py::arg("w"), py::arg("enc"), py::arg("dec"), py::arg("k"), py::arg("lambda1") = 2.0,
      py::arg("lambda2") = 0.1, py::arg("l1_mode") = "mean");

  m.def(
      "train",
      [](const Matrix& train, const Matrix& val, const std::string& method, Index k, Index d, double lambda1,
         double lambda2, double lr, int epochs, Index batch, std::uint64_t seed, const std::string& l1_mode,
         bool restore_best, Index h, double lambda0, std::vector<double> lambdas) {
        const Hyperparams hp = make_hp(k, d, lambda1, lambda2, lr, epochs, batch, seed, l1_mode, restore_best);
        std::optional<HierarchyParams> hier;
        if (method == "hfae") {
          HierarchyParams p;
          p.h = h;
          p.k = k;
          p.lambda0 = lambda0;
          p.lambdas = std::move(lambdas);
          hier = p;
        }
        TrainedModel t;
        {
          py::gil_scoped_release release;
          t = train_method(method, train, val, hp, hier);
        }
        py::dict out = checkpoint_dict(t.checkpoint);
        out["report"] = report_dict(t.report);
        return out;
      },
      py::arg("train"), py::arg("val"), py::arg("method") = "fae", py::arg("k") = 50, py::arg("d") = 0,
      py::arg("lambda1") = 2.0, py::arg("lambda2") = 0.1, py::arg("lr") = 1e-3, py::arg("epochs") = 1000,
      py::arg("batch") = 0, py::arg("seed") = 0, py::arg("l1_mode") = "mean", py::arg("restore_best") = true,
      py::arg("h") = 3, py::arg("lambda0") = 0.05, py::arg("lambdas") = std::vector<double>{1.5, 2.0, 3.0},
      "Train fae, iae, ae or hfae. Returns weights, encoder, decoder, selections and the loss history.");

  m.def(
      "save_checkpoint",
      [](const std::string& path, const std::string& method, const Vector& w, const Matrix& enc, const Matrix& dec,
         Index k, std::uint64_t seed) {
        Checkpoint c;
        c.method = method;
        c.hp.k = k;
        c.hp.d = enc.cols();
        c.hp.seed = seed;
        c.params = ModelParams{w, EncoderDecoder{enc, dec}};
        c.rng_algorithm = std::string(SeededRng::kAlgorithm);
        write_checkpoint(path, c);
      },
      py::arg("path"), py::arg("method"), py::arg("w"), py::arg("enc"), py::arg("dec"), py::arg("k"),
      py::arg("seed") = 0);
  m.def("load_checkpoint", [](const std::string& path) { return checkpoint_dict(read_checkpoint(path)); },
        py::arg("path"));

  m.def(
      "linear_recon_error",
      [](const Matrix& train, const Matrix& test, const std::vector<Index>& indices) {
        const SelectionResult sel = selection_of(indices);
        return recon_error(test, sel, fit_linear_decoder(train, sel));
      },
      py::arg("train"), py::arg("test"), py::arg("indices"),
      "Test MSE of the least-squares map from the selected train columns to all columns.");

  m.def(
      "extra_trees_predict",
      [](const Matrix& train, const std::vector<int>& labels, const Matrix& test, int n_trees, std::uint64_t seed) {
        ExtraTreesParams p;
        p.n_trees = n_trees;
        p.seed = seed;
        return predict(fit_extra_trees(train, labels, p), test);
      },
      py::arg("train"), py::arg("labels"), py::arg("test"), py::arg("n_trees") = 100, py::arg("seed") = 0);
  m.def("accuracy", &accuracy, py::arg("pred"), py::arg("truth"));

  m.def(
      "split_indices",
      [](Index n, double train, double val, double test, std::uint64_t seed) {
        const SplitIndices s = split_indices(n, SplitSpec{train, val, test, seed});
        return py::make_tuple(s.train, s.val, s.test);
      },
      py::arg("n"), py::arg("train") = 0.72, py::arg("val") = 0.08, py::arg("test") = 0.20, py::arg("seed") = 0);
  m.def(
      "synth_blocks",
      [](Index n, Index blocks, Index per_block, double noise_std, std::uint64_t seed) {
        return dataset_dict(synth_blocks(n, blocks, per_block, noise_std, seed));
      },
      py::arg("n"), py::arg("blocks"), py::arg("per_block"), py::arg("noise_std"), py::arg("seed") = 0);
  m.def(
      "load_csv",
      [](const std::string& path, bool has_header, std::optional<std::string> label_column) {
        std::optional<ColumnRef> col;
        if (label_column) col = ColumnRef{*label_column};
        return dataset_dict(load_csv(path, has_header, col));
      },
      py::arg("path"), py::arg("has_header") = false, py::arg("label_column") = py::none());
  m.def(
      "load_idx", [](const std::string& images, const std::string& labels) { return dataset_dict(load_idx(images, labels)); },
      py::arg("images"), py::arg("labels"));
}
