#include "groklab/optim.hpp"

#include <algorithm>
#include <cmath>

namespace groklab {

const char* algo_name(Algo a) {
  switch (a) {
    case Algo::sgd: return "sgd";
    case Algo::momentum: return "momentum";
    case Algo::rmsprop: return "rmsprop";
    case Algo::rprop: return "rprop";
    case Algo::adam: return "adam";
    case Algo::adamax: return "adamax";
    case Algo::adamw: return "adamw";
  }
  return "?";
}

Algo algo_from_name(const std::string& s) {
  if (s == "sgd") return Algo::sgd;
  if (s == "momentum") return Algo::momentum;
  if (s == "rmsprop") return Algo::rmsprop;
  if (s == "rprop") return Algo::rprop;
  if (s == "adam") return Algo::adam;
  if (s == "adamax") return Algo::adamax;
  if (s == "adamw") return Algo::adamw;
  throw ConfigError("unknown optimizer algo: " + s);
}

void OptimizerConfig::validate(const std::string& p) const {
  if (!(lr > 0.0)) throw ConfigError(p + ".lr must be positive");
  if (weight_decay < 0.0) throw ConfigError(p + ".weight_decay must be >= 0");
  if (beta1 < 0.0 || beta1 >= 1.0) throw ConfigError(p + ".beta1 must be in [0,1)");
  if (beta2 < 0.0 || beta2 >= 1.0) throw ConfigError(p + ".beta2 must be in [0,1)");
  if (!(eps > 0.0)) throw ConfigError(p + ".eps must be positive");
  if (rprop_step_min <= 0.0 || rprop_step_max < rprop_step_min)
    throw ConfigError(p + ".rprop step bounds invalid");
}

double lr_at(const Schedule& s, long long t) {
  if (t < 0) throw RuntimeFault("lr_at: negative step");
  if (s.warmup_steps <= 0) return s.base_lr;
  const double frac = static_cast<double>(t) / static_cast<double>(s.warmup_steps);
  return s.base_lr * std::min(1.0, frac);
}

double clip_grad_norm(Span grad, double eta) {
  if (!(eta > 0.0)) throw RuntimeFault("clip_grad_norm: eta must be positive");
  const double nrm = norm2(grad);
  if (nrm > eta) {
    const double s = eta / nrm;
    for (double& g : grad) g *= s;
  }
  return nrm;
}

Optimizer::Optimizer(const OptimizerConfig& cfg, std::size_t n) : cfg_(cfg), n_(n) {
  cfg_.validate();
  switch (cfg_.algo) {
    case Algo::sgd:
      break;
    case Algo::momentum:
      m_.assign(n, 0.0);
      break;
    case Algo::rmsprop:
      v_.assign(n, 0.0);
      break;
    case Algo::rprop:
      rprop_step_.assign(n, cfg_.lr);
      prev_grad_.assign(n, 0.0);
      break;
    case Algo::adam:
    case Algo::adamw:
      m_.assign(n, 0.0);
      v_.assign(n, 0.0);
      break;
    case Algo::adamax:
      m_.assign(n, 0.0);
      v_.assign(n, 0.0);  // infinity-norm buffer
      break;
  }
}

void Optimizer::set_decay_mask(std::vector<std::uint8_t> mask) {
  if (!mask.empty() && mask.size() != n_)
    throw RuntimeFault("decay mask size mismatch");
  decay_mask_ = std::move(mask);
}

void Optimizer::step(Span params, ConstSpan grad, double lr) {
  if (params.size() != n_ || grad.size() != n_)
    throw RuntimeFault("optimizer size mismatch");
  for (double g : grad)
    if (!std::isfinite(g))
      throw RuntimeFault("non-finite gradient component at optimizer step " +
                         std::to_string(t_ + 1));
  ++t_;
  const double wd = cfg_.weight_decay;
  auto decays = [&](std::size_t i) {
    return wd != 0.0 && (decay_mask_.empty() || decay_mask_[i] != 0);
  };
  // classic L2 coupling for everything except adamw, which decays decoupled
  auto g_eff = [&](std::size_t i) {
    double g = grad[i];
    if (cfg_.algo != Algo::adamw && decays(i)) g += wd * params[i];
    return g;
  };

  switch (cfg_.algo) {
    case Algo::sgd:
      for (std::size_t i = 0; i < n_; ++i) params[i] -= lr * g_eff(i);
      break;
    case Algo::momentum:
      for (std::size_t i = 0; i < n_; ++i) {
        const double g = g_eff(i);
        m_[i] = (t_ == 1) ? g : cfg_.momentum * m_[i] + g;
        params[i] -= lr * m_[i];
      }
      break;
    case Algo::rmsprop:
      for (std::size_t i = 0; i < n_; ++i) {
        const double g = g_eff(i);
        v_[i] = cfg_.rmsprop_alpha * v_[i] + (1.0 - cfg_.rmsprop_alpha) * g * g;
        params[i] -= lr * g / (std::sqrt(v_[i]) + cfg_.eps);
      }
      break;
    case Algo::rprop:
      for (std::size_t i = 0; i < n_; ++i) {
        double g = g_eff(i);
        const double sign_change = prev_grad_[i] * g;
        if (sign_change > 0.0)
          rprop_step_[i] = std::min(rprop_step_[i] * cfg_.rprop_eta_plus, cfg_.rprop_step_max);
        else if (sign_change < 0.0) {
          rprop_step_[i] = std::max(rprop_step_[i] * cfg_.rprop_eta_minus, cfg_.rprop_step_min);
          g = 0.0;  // skip the move right after a sign flip
        }
        if (g > 0.0)
          params[i] -= rprop_step_[i];
        else if (g < 0.0)
          params[i] += rprop_step_[i];
        prev_grad_[i] = g;
      }
      break;
    case Algo::adam:
    case Algo::adamw: {
      const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
      const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
      for (std::size_t i = 0; i < n_; ++i) {
        if (cfg_.algo == Algo::adamw && decays(i)) params[i] -= lr * wd * params[i];
        const double g = g_eff(i);
        m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * g;
        v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * g * g;
        const double mhat = m_[i] / bc1;
        const double vhat = v_[i] / bc2;
        params[i] -= lr * mhat / (std::sqrt(vhat) + cfg_.eps);
      }
      break;
    }
    case Algo::adamax: {
      const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
      for (std::size_t i = 0; i < n_; ++i) {
        const double g = g_eff(i);
        m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * g;
        v_[i] = std::max(cfg_.beta2 * v_[i], std::abs(g));
        params[i] -= (lr / bc1) * m_[i] / (v_[i] + cfg_.eps);
      }
      break;
    }
  }
}

}  // namespace groklab
