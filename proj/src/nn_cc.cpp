#include "ccident/nn_cc.hpp"

#include <charconv>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace ccident {

namespace {

constexpr std::pair<Activation, std::string_view> kActivationNames[] = {
    {Activation::ReLU, "relu"},       {Activation::LeakyReLU, "leaky_relu"},
    {Activation::Tanh, "tanh"},       {Activation::Sigmoid, "sigmoid"},
    {Activation::SiLU, "silu"},       {Activation::Sin, "sin"},
    {Activation::GeLU, "gelu"},       {Activation::SeLU, "selu"},
    {Activation::SoftPlus, "softplus"}, {Activation::RReLU, "rrelu"},
};

}  // namespace

std::string_view activation_name(Activation a) {
  for (const auto& [k, name] : kActivationNames)
    if (k == a) return name;
  return "?";
}

Activation parse_activation(std::string_view s) {
  for (const auto& [k, name] : kActivationNames)
    if (name == s) return k;
  std::string known;
  for (const auto& [k, name] : kActivationNames)
    known += (known.empty() ? "" : ", ") + std::string(name);
  throw std::invalid_argument("unknown activation '" + std::string(s) +
                              "' (known: " + known + ")");
}

const std::vector<Activation>& all_activations() {
  static const std::vector<Activation> all = [] {
    std::vector<Activation> v;
    for (const auto& [k, name] : kActivationNames) v.push_back(k);
    return v;
  }();
  return all;
}

AdamState::AdamState(const Net& like)
    : m(like.widths(), like.activation()), v(like.widths(), like.activation()) {}

void AdamState::update(Net& net, const Net& grad, const TrainConfig& cfg) {
  ++step;
  const double c1 = 1.0 - std::pow(cfg.beta1, double(step));
  const double c2 = 1.0 - std::pow(cfg.beta2, double(step));
  const double lr = cfg.learning_rate, b1 = cfg.beta1, b2 = cfg.beta2,
               eps = cfg.eps;
  for (std::size_t l = 0; l < net.layers(); ++l) {
    auto step_tensor = [&](auto& p, auto& mm, auto& vv, const auto& g) {
      mm.array() = b1 * mm.array() + (1 - b1) * g.array();
      vv.array() = b2 * vv.array() + (1 - b2) * g.array().square();
      p.array() -= lr * (mm.array() / c1) / ((vv.array() / c2).sqrt() + eps);
    };
    step_tensor(net.weight(l), m.weight(l), v.weight(l), grad.weight(l));
    step_tensor(net.bias(l), m.bias(l), v.bias(l), grad.bias(l));
  }
}

void loss_and_grads(const Net& net_a, const Net& net_b, const Dataset& ds,
                    ModelFamily family, double lambda_c, LossGrad& out,
                    LossWorkspace& ws) {
  const Eigen::Index n = ds.size();
  const bool pos = family == ModelFamily::PositionFriction;
  const auto xs = ds.x.transpose();
  const auto vs = ds.xdot.transpose();

  const Eigen::RowVectorXd fa = net_a.forward(pos ? xs : vs, ws.cache_a);
  const Eigen::RowVectorXd fb = net_b.forward(xs, ws.cache_b);

  Eigen::RowVectorXd r = ds.xddot.transpose() - ds.fext.transpose() + fb;
  if (pos)
    r.array() += fa.array() * vs.array();
  else
    r += fa;

  out.data_loss = r.squaredNorm() / double(n);
  out.loss = out.data_loss;

  const Eigen::RowVectorXd db = (2.0 / double(n)) * r;
  if (pos)
    net_a.backward(ws.cache_a, db.cwiseProduct(vs), out.grad_a);
  else
    net_a.backward(ws.cache_a, db, out.grad_a);
  net_b.backward(ws.cache_b, db, out.grad_b);

  if (!pos && lambda_c != 0) {
    const double f0 = net_b.forward(Eigen::RowVectorXd::Zero(1), ws.cache_0)[0];
    out.loss += lambda_c * f0 * f0;
    Net g0(net_b.widths(), net_b.activation());
    net_b.backward(ws.cache_0, Eigen::RowVectorXd::Constant(1, 2 * lambda_c * f0), g0);
    out.grad_b.zip(g0, [](auto& p, const auto& q) { p += q; });
  }
}

LossGrad loss_and_grads(const Net& net_a, const Net& net_b, const Dataset& ds,
                        ModelFamily family, double lambda_c) {
  LossGrad out{0, 0, Net(net_a.widths(), net_a.activation()),
               Net(net_b.widths(), net_b.activation())};
  LossWorkspace ws;
  loss_and_grads(net_a, net_b, ds, family, lambda_c, out, ws);
  return out;
}

EdgeLines fit_edge_extrapolation(const std::function<double(double)>& f,
                                 const Domain& domain, double fraction,
                                 int points) {
  if (!domain.bounded() || !(domain.hi > domain.lo))
    throw std::invalid_argument("edge extrapolation: degenerate domain [" +
                                std::to_string(domain.lo) + ", " +
                                std::to_string(domain.hi) + "]");
  if (points < 2 || !(fraction > 0 && fraction <= 0.5))
    throw std::invalid_argument("edge extrapolation: need >= 2 points and 0 < fraction <= 0.5");
  const double w = fraction * domain.width();
  auto line = [&](double a, double b) {
    Eigen::MatrixXd design(points, 2);
    Eigen::VectorXd y(points);
    for (int k = 0; k < points; ++k) {
      const double z = a + (b - a) * double(k) / double(points - 1);
      design(k, 0) = z;
      design(k, 1) = 1;
      y[k] = f(z);
    }
    const Eigen::Vector2d sol = design.colPivHouseholderQr().solve(y);
    return std::pair{sol[0], sol[1]};
  };
  EdgeLines e;
  std::tie(e.lo_slope, e.lo_intercept) = line(domain.lo, domain.lo + w);
  std::tie(e.hi_slope, e.hi_intercept) = line(domain.hi - w, domain.hi);
  return e;
}

IdentifiedModel neural_model(ModelFamily family,
                             std::shared_ptr<const Net> net_a,
                             std::shared_ptr<const Net> net_b,
                             const Domain& domain_a, const Domain& domain_b,
                             const EdgeLines& edges_a,
                             const EdgeLines& edges_b) {
  const Variable in_a = family == ModelFamily::PositionFriction
                            ? Variable::Position
                            : Variable::Velocity;
  CurveModel a(CurveKind::Neural, in_a,
               [net_a](double z) { return (*net_a)(z); }, domain_a);
  CurveModel b(CurveKind::Neural, Variable::Position,
               [net_b](double z) { return (*net_b)(z); }, domain_b);
  return {family, a.with_edge_lines(edges_a), b.with_edge_lines(edges_b)};
}

namespace {

void finish(NeuralFit& fit, ModelFamily family, Net a, Net b) {
  auto pa = std::make_shared<const Net>(std::move(a));
  auto pb = std::make_shared<const Net>(std::move(b));
  fit.net_a = pa;
  fit.net_b = pb;
  fit.edges_a = fit_edge_extrapolation([pa](double z) { return (*pa)(z); },
                                       fit.domain_a);
  fit.edges_b = fit_edge_extrapolation([pb](double z) { return (*pb)(z); },
                                       fit.domain_b);
  fit.model = neural_model(family, pa, pb, fit.domain_a, fit.domain_b,
                           fit.edges_a, fit.edges_b);
}

}  // namespace

NeuralFit train(const Dataset& ds, ModelFamily family, const TrainConfig& cfg) {
  require_valid(ds);
  if (cfg.max_epochs < 0) throw std::invalid_argument("train: max_epochs < 0");
  NeuralFit fit;
  fit.config = cfg;
  const bool pos = family == ModelFamily::PositionFriction;
  fit.domain_a = Domain::of(pos ? ds.x : ds.xdot);
  fit.domain_b = Domain::of(ds.x);

  const double lambda = pos ? 0.0 : cfg.lambda_c;
  Net a = Net::init(cfg.widths(), cfg.activation, fan_out_seed(cfg.seed, 0));
  Net b = Net::init(cfg.widths(), cfg.activation, fan_out_seed(cfg.seed, 1));
  AdamState adam_a(a), adam_b(b);
  LossGrad lg{0, 0, Net(a.widths(), a.activation()),
              Net(b.widths(), b.activation())};
  LossWorkspace ws;

  long epoch = 0;
  double loss = 0;
  for (;; ++epoch) {
    loss_and_grads(a, b, ds, family, lambda, lg, ws);
    loss = lg.loss;
    if (!std::isfinite(loss))
      throw TrainingFailure("non-finite training loss at epoch " +
                                std::to_string(epoch),
                            epoch);
    if (cfg.history_every > 0 && epoch % cfg.history_every == 0)
      fit.history.emplace_back(epoch, loss);
    if (epoch >= cfg.max_epochs || loss <= cfg.loss_stop) break;
    adam_a.update(a, lg.grad_a, cfg);
    adam_b.update(b, lg.grad_b, cfg);
  }
  if (fit.history.empty() || fit.history.back().first != epoch)
    fit.history.emplace_back(epoch, loss);
  fit.final_loss = loss;
  fit.epochs = epoch;
  finish(fit, family, std::move(a), std::move(b));
  return fit;
}

void write_neural_model(std::ostream& os, const NeuralFit& fit) {
  const Net& a = *fit.net_a;
  std::ostringstream widths;
  for (std::size_t i = 0; i < a.widths().size(); ++i)
    widths << (i ? "," : "") << a.widths()[i];
  os << std::setprecision(17);
  const EdgeLines& ea = fit.edges_a;
  const EdgeLines& eb = fit.edges_b;
  os << "nncc v1 family=" << family_index(fit.model.family)
     << " activation=" << activation_name(a.activation())
     << " widths=" << widths.str()
     << " domain_a=" << fit.domain_a.lo << ',' << fit.domain_a.hi
     << " domain_b=" << fit.domain_b.lo << ',' << fit.domain_b.hi
     << " edge_lines=" << ea.lo_slope << ',' << ea.lo_intercept << ','
     << ea.hi_slope << ',' << ea.hi_intercept << ',' << eb.lo_slope << ','
     << eb.lo_intercept << ',' << eb.hi_slope << ',' << eb.hi_intercept
     << " seed=" << fit.config.seed << " epochs=" << fit.epochs
     << " final_loss=" << fit.final_loss
     << " lr=" << fit.config.learning_rate
     << " lambda_c=" << fit.config.lambda_c << '\n';
  for (const Net* net : {fit.net_a.get(), fit.net_b.get()}) {
    const Eigen::VectorXd p = net->flatten();
    for (Eigen::Index i = 0; i < p.size(); ++i) os << p[i] << '\n';
  }
}

namespace {

double to_double(const std::string& s) {
  double v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size())
    throw InvalidData("nncc: bad number '" + s + "'");
  return v;
}

std::vector<double> number_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(item));
  return out;
}

}  // namespace

NeuralFit read_neural_model(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw InvalidData("nncc: empty input");
  std::istringstream hs(header);
  std::string magic, version, tok;
  hs >> magic >> version;
  if (magic != "nncc" || version != "v1")
    throw InvalidData("nncc: expected header 'nncc v1', got '" + magic + " " +
                      version + "'");
  std::map<std::string, std::string> kv;
  while (hs >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw InvalidData("nncc: bad header token '" + tok + "'");
    kv[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  auto need = [&](const char* k) -> const std::string& {
    auto it = kv.find(k);
    if (it == kv.end()) throw InvalidData(std::string("nncc: header lacks ") + k);
    return it->second;
  };

  NeuralFit fit;
  const ModelFamily family = parse_family(need("family"));
  const Activation activation = parse_activation(need("activation"));
  std::vector<int> widths;
  for (double w : number_list(need("widths"))) widths.push_back(int(w));
  const auto da = number_list(need("domain_a"));
  const auto db = number_list(need("domain_b"));
  const auto el = number_list(need("edge_lines"));
  if (da.size() != 2 || db.size() != 2 || el.size() != 8)
    throw InvalidData("nncc: domain_a/domain_b need 2 values, edge_lines 8");
  fit.domain_a = {da[0], da[1]};
  fit.domain_b = {db[0], db[1]};
  fit.edges_a = {el[0], el[1], el[2], el[3]};
  fit.edges_b = {el[4], el[5], el[6], el[7]};
  if (kv.count("seed")) fit.config.seed = std::stoull(kv["seed"]);
  if (kv.count("epochs")) fit.epochs = std::stol(kv["epochs"]);
  if (kv.count("final_loss")) fit.final_loss = to_double(kv["final_loss"]);
  if (kv.count("lr")) fit.config.learning_rate = to_double(kv["lr"]);
  if (kv.count("lambda_c")) fit.config.lambda_c = to_double(kv["lambda_c"]);
  fit.config.activation = activation;
  fit.config.hidden_layers = int(widths.size()) - 2;
  fit.config.neurons = widths.size() > 2 ? widths[1] : 1;

  Net nets[2] = {Net(widths, activation), Net(widths, activation)};
  for (Net& net : nets) {
    Eigen::VectorXd p(net.parameter_count());
    std::string line;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      if (!std::getline(is, line))
        throw InvalidData("nncc: truncated parameter list");
      p[i] = to_double(line);
    }
    net.unflatten(p);
  }
  auto pa = std::make_shared<const Net>(std::move(nets[0]));
  auto pb = std::make_shared<const Net>(std::move(nets[1]));
  fit.net_a = pa;
  fit.net_b = pb;
  fit.model = neural_model(family, pa, pb, fit.domain_a, fit.domain_b,
                           fit.edges_a, fit.edges_b);
  return fit;
}

}  // namespace ccident
