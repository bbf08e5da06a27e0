#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include "panelforge/factor.hpp"
#include "panelforge/kernels.hpp"
#include "panelforge/oracle.hpp"

namespace py = pybind11;
using namespace panelforge;

namespace {

using FArray = py::array_t<double, py::array::f_style | py::array::forcecast>;

Pool& default_pool() {
  static Pool pool(default_thread_count());
  return pool;
}

Pool& pick(Pool* pool) { return pool != nullptr ? *pool : default_pool(); }

FArray as_matrix(const py::handle& obj, const char* name) {
  FArray arr = FArray::ensure(obj);
  if (!arr) throw py::type_error(std::string(name) + " must be convertible to a float64 array");
  if (arr.ndim() != 2) throw py::value_error(std::string(name) + " must be 2-dimensional");
  return arr;
}

// Fresh Fortran-ordered copy that the library may overwrite.
Matrix to_matrix(const FArray& arr) {
  const auto rows = static_cast<std::size_t>(arr.shape(0));
  const auto cols = static_cast<std::size_t>(arr.shape(1));
  Matrix m(rows, cols);
  auto r = arr.unchecked<2>();
  for (std::size_t j = 0; j < cols; ++j)
    for (std::size_t i = 0; i < rows; ++i) m(i, j) = r(i, j);
  return m;
}

FArray to_array(const Matrix& m) {
  FArray out({m.rows(), m.cols()});
  auto w = out.mutable_unchecked<2>();
  for (std::size_t j = 0; j < m.cols(); ++j)
    for (std::size_t i = 0; i < m.rows(); ++i) w(i, j) = m(i, j);
  return out;
}

kernels::Transpose trans(bool t) { return t ? kernels::Transpose::transpose : kernels::Transpose::none; }

factor::Strategy strategy_of(const std::string& s) {
  const auto parsed = factor::parse_strategy(s);
  if (!parsed) throw py::value_error("unknown strategy '" + s + "' (expected mtb, rtm, la or la-mb)");
  return *parsed;
}

CacheConfig config(std::size_t block) { return CacheConfig::haswell().with_block(block); }

}  // namespace

PYBIND11_MODULE(_panelforge, m) {
  m.doc() = "Blocked dense LU and QR factorizations with fork-join, task-graph and look-ahead schedules";

  py::class_<Pool>(m, "Pool")
      .def(py::init<std::size_t>(), py::arg("threads"))
      .def_property_readonly("threads", &Pool::size);

  m.def("default_threads", &default_thread_count);

  m.def(
      "gemm",
      [](py::handle c_in, py::handle a_in, py::handle b_in, bool trans_a, bool trans_b, Pool* pool) {
        Matrix c = to_matrix(as_matrix(c_in, "c"));
        const Matrix a = to_matrix(as_matrix(a_in, "a"));
        const Matrix b = to_matrix(as_matrix(b_in, "b"));
        Pool& p = pick(pool);
        {
          py::gil_scoped_release release;
          kernels::gemm(c.view(), a.view(), b.view(), trans(trans_a), trans(trans_b), CacheConfig::haswell(), p,
                        MalleableTeam(p.size(), p.size()));
        }
        return to_array(c);
      },
      py::arg("c"), py::arg("a"), py::arg("b"), py::arg("trans_a") = false, py::arg("trans_b") = false,
      py::arg("pool") = nullptr, "Returns c + op(a) @ op(b).");

  m.def(
      "lu",
      [](py::handle a_in, const std::string& strategy, std::size_t block, Pool* pool) {
        Matrix a = to_matrix(as_matrix(a_in, "a"));
        const factor::Strategy s = strategy_of(strategy);
        factor::FactorOutput out;
        {
          py::gil_scoped_release release;
          out = factor::factorize(a.view(), factor::Kind::lu, s, config(block), pick(pool));
        }
        return py::make_tuple(to_array(a), out.pivots, out.info);
      },
      py::arg("a"), py::arg("strategy") = "mtb", py::arg("block") = 192, py::arg("pool") = nullptr,
      "LU with partial pivoting. Returns (factors, 1-based pivots, info).");

  m.def(
      "qr",
      [](py::handle a_in, const std::string& strategy, std::size_t block, Pool* pool) {
        Matrix a = to_matrix(as_matrix(a_in, "a"));
        const factor::Strategy s = strategy_of(strategy);
        factor::FactorOutput out;
        {
          py::gil_scoped_release release;
          out = factor::factorize(a.view(), factor::Kind::qr, s, config(block), pick(pool));
        }
        return py::make_tuple(to_array(a), out.tau);
      },
      py::arg("a"), py::arg("strategy") = "mtb", py::arg("block") = 192, py::arg("pool") = nullptr,
      "Householder QR. Returns (factors, tau).");

  m.def(
      "flops",
      [](const std::string& kind, std::uint64_t n) {
        const auto k = factor::parse_kind(kind);
        if (!k) throw py::value_error("kind must be 'lu' or 'qr'");
        return factor::flops(*k, n);
      },
      py::arg("kind"), py::arg("n"));

  m.def(
      "lu_residual",
      [](py::handle a_in, py::handle f_in, const std::vector<std::int64_t>& pivots) {
        const Matrix a = to_matrix(as_matrix(a_in, "original"));
        const Matrix f = to_matrix(as_matrix(f_in, "factors"));
        return oracle::lu_residual(a.view(), f.view(), pivots);
      },
      py::arg("original"), py::arg("factors"), py::arg("pivots"));

  m.def(
      "qr_residual",
      [](py::handle a_in, py::handle f_in, const std::vector<double>& tau) {
        const Matrix a = to_matrix(as_matrix(a_in, "original"));
        const Matrix f = to_matrix(as_matrix(f_in, "factors"));
        const auto r = oracle::qr_residual(a.view(), f.view(), tau);
        return py::make_tuple(r.factor, r.orthogonality);
      },
      py::arg("original"), py::arg("factors"), py::arg("tau"));

  m.def(
      "form_q",
      [](py::handle f_in, const std::vector<double>& tau) {
        const Matrix f = to_matrix(as_matrix(f_in, "factors"));
        return to_array(oracle::form_q(f.view(), tau));
      },
      py::arg("factors"), py::arg("tau"));

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const std::invalid_argument& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const std::out_of_range& e) {
      PyErr_SetString(PyExc_IndexError, e.what());
    }
  });
}
