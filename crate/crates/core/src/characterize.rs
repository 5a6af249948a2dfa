//! Numbering of eigenvalue multisets, the admissibility check, and the
//! splitting of spectra with repeated Robin coefficients.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{fit_remainders, AsymptoticTemplate, HClass, HConfiguration, RemainderProfile};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::forward;
use crate::roots::MAX_LOW_GROWTH;
use crate::spectrum::{NumberingSource, Spectrum, SpectrumEntry};

/// Shells assigned jointly by optimal matching.
pub const GLOBAL_LOW_SHELLS: usize = 3;

/// Minimum-cost perfect matching on a square cost matrix; `result[row]` is
/// the assigned column.
pub fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut result = vec![0; n];
    for j in 1..=n {
        if p[j] > 0 {
            result[p[j] - 1] = j - 1;
        }
    }
    result
}

fn by_re_im(a: &Complex64, b: &Complex64) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Assigns `values` to `slots` (template square roots) minimizing the total
/// distance of square roots.
fn assign(values: &[Complex64], slots: &[(usize, usize)], template: &AsymptoticTemplate) -> Vec<SpectrumEntry> {
    let mut vals = values.to_vec();
    vals.sort_by(by_re_im);
    let cost: Vec<Vec<f64>> = vals
        .iter()
        .map(|v| {
            let r = v.sqrt();
            slots
                .iter()
                .map(|&(n, k)| (r - template.sqrt_value(n, k)).norm())
                .collect()
        })
        .collect();
    hungarian(&cost)
        .into_iter()
        .zip(&vals)
        .map(|(col, &lambda)| SpectrumEntry {
            n: slots[col].0,
            k: slots[col].1,
            lambda,
            multiplicity: 1,
        })
        .collect()
}

/// Numbers a low-region block (`n_low` shells) and per-shell blocks that
/// start at shell `n_low`.
pub fn number_bins(
    low: &[Complex64],
    shells: &[Vec<Complex64>],
    template: &AsymptoticTemplate,
    n_low: usize,
) -> Result<Spectrum> {
    let m = template.branches.len();
    if low.len() != n_low * m {
        return Err(Error::ShellOverflow {
            shell: 0,
            received: low.len(),
            expected: n_low * m,
        });
    }
    let slots: Vec<(usize, usize)> = (0..n_low).flat_map(|n| (1..=m).map(move |k| (n, k))).collect();
    let mut entries = assign(low, &slots, template);
    for (i, shell) in shells.iter().enumerate() {
        let n = n_low + i;
        if shell.len() != m {
            return Err(Error::ShellOverflow {
                shell: n,
                received: shell.len(),
                expected: m,
            });
        }
        let slots: Vec<(usize, usize)> = (1..=m).map(|k| (n, k)).collect();
        entries.extend(assign(shell, &slots, template));
    }
    let mut s = Spectrum {
        m,
        entries,
        numbering_source: NumberingSource::Computed,
    };
    s.sort();
    Ok(s)
}

/// Numbers a raw multiset against a template: shells by `Re sqrt(lambda)`,
/// optimal matching within each shell and jointly over the lowest shells.
/// The joint block extends over every low shell with a wrong count.
pub fn assign_numbering(raw: &[Complex64], template: &AsymptoticTemplate) -> Result<Spectrum> {
    let m = template.branches.len();
    if m == 0 || raw.len() % m != 0 || raw.is_empty() {
        return Err(Error::IncompleteShells { len: raw.len(), m });
    }
    let n_shells = raw.len() / m;
    let bin = |v: &Complex64| (v.sqrt().re + 0.25).floor().max(0.0) as usize;
    let mut counts = vec![0usize; n_shells];
    for v in raw {
        let n = bin(v);
        if n >= n_shells {
            return Err(Error::ShellOverflow {
                shell: n,
                received: 1,
                expected: 0,
            });
        }
        counts[n] += 1;
    }
    // the joint block grows past the last shell whose count is off
    let mut n_low = GLOBAL_LOW_SHELLS.min(n_shells);
    if let Some(last) = counts.iter().rposition(|&c| c != m) {
        if last >= GLOBAL_LOW_SHELLS + MAX_LOW_GROWTH {
            return Err(Error::ShellOverflow {
                shell: last,
                received: counts[last],
                expected: m,
            });
        }
        n_low = n_low.max(last + 1);
    }
    let mut low = Vec::new();
    let mut shells = vec![Vec::new(); n_shells - n_low];
    for &v in raw {
        let n = bin(&v);
        if n < n_low {
            low.push(v);
        } else {
            shells[n - n_low].push(v);
        }
    }
    number_bins(&low, &shells, template, n_low)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "reason", rename_all = "kebab-case")]
pub enum Verdict {
    Admissible,
    Inadmissible(String),
    Indeterminate(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub numbering: Option<Spectrum>,
    pub profiles: Vec<RemainderProfile>,
    /// Distinct values of multiplicity above one, with the shell of their
    /// first occurrence.
    pub multiple: Vec<(usize, Complex64, usize)>,
    pub verdict: Verdict,
}

/// Checks a raw multiset against the asymptotic characterization.
pub fn check_admissible(raw: &[Complex64], hconf: &HConfiguration, cfg: &Config) -> AdmissibilityReport {
    let template = AsymptoticTemplate::new(hconf);
    let mut report = AdmissibilityReport {
        numbering: None,
        profiles: Vec::new(),
        multiple: Vec::new(),
        verdict: Verdict::Admissible,
    };
    if hconf.class == HClass::Inadmissible {
        report.verdict = Verdict::Inadmissible(hconf.describe());
        return report;
    }
    let spectrum = match assign_numbering(raw, &template) {
        Ok(s) => s,
        Err(e) => {
            report.verdict = Verdict::Inadmissible(e.to_string());
            return report;
        }
    };
    report.profiles = fit_remainders(&spectrum, &template);
    let mut seen: Vec<Complex64> = Vec::new();
    for e in &spectrum.entries {
        let tol = cfg.cluster_radius * (1.0 + e.lambda.norm());
        if seen.iter().any(|s| (s - e.lambda).norm() <= tol) {
            continue;
        }
        let mult = raw.iter().filter(|v| (*v - e.lambda).norm() <= tol).count();
        if mult > 1 {
            report.multiple.push((e.n, e.lambda, mult));
        }
        seen.push(e.lambda);
    }
    let shells = spectrum.shells();
    report.verdict = if shells < cfg.min_shells_verdict {
        Verdict::Indeterminate(format!(
            "{shells} shells; at least {} are needed for a verdict",
            cfg.min_shells_verdict
        ))
    } else if let Some(p) = report.profiles.iter().find(|p| p.plateau_ratio >= cfg.plateau_ratio) {
        Verdict::Inadmissible(format!(
            "remainders of branch {} are not square-summable (plateau ratio {:.3})",
            p.k, p.plateau_ratio
        ))
    } else if let Some(&(n, v, mult)) = report.multiple.iter().find(|(n, _, _)| 2 * n >= shells) {
        Verdict::Inadmissible(format!(
            "multiple eigenvalue {v} (multiplicity {mult}) in shell {n} of {shells}"
        ))
    } else {
        Verdict::Admissible
    };
    report.numbering = Some(spectrum);
    report
}

/// A zero of `phi_j(pi, .)` forced into the spectrum by a repeated
/// coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MuCopy {
    pub edge: usize,
    pub n: usize,
    pub lambda: Complex64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegenerateSplit {
    pub mu_part: Vec<MuCopy>,
    /// Remaining eigenvalues numbered against the deflated template.
    pub lambda_part: Spectrum,
}

/// Removes the `phi_j(pi, .)` zeros contributed by repeated coefficients.
pub fn degenerate_split(raw: &[Complex64], hconf: &HConfiguration, cfg: &Config) -> Result<DegenerateSplit> {
    if hconf.class != HClass::Bullet {
        return Err(Error::InvalidInput(
            "splitting applies only to repeated Robin coefficients".into(),
        ));
    }
    let m = hconf.m();
    if raw.len() % m != 0 || raw.is_empty() {
        return Err(Error::IncompleteShells { len: raw.len(), m });
    }
    let n_shells = raw.len() / m;
    let mut remaining: Vec<Option<Complex64>> = raw.iter().copied().map(Some).collect();
    let mut mu_part = Vec::new();
    for g in 0..hconf.groups.len() {
        let edges = hconf.group_edges(g);
        if edges.len() < 2 {
            continue;
        }
        let mus = forward::mu(hconf, edges[0], n_shells, cfg)?;
        for &edge in &edges[1..] {
            for (n, &target) in mus.iter().enumerate() {
                let tol = cfg.split_tol * (1.0 + target.norm());
                let best = remaining
                    .iter()
                    .enumerate()
                    .filter_map(|(i, v)| v.map(|v| (i, (v - target).norm())))
                    .min_by(|a, b| a.1.total_cmp(&b.1));
                match best {
                    Some((i, d)) if d <= tol => {
                        mu_part.push(MuCopy {
                            edge,
                            n,
                            lambda: remaining[i].take().expect("present"),
                        });
                    }
                    _ => {
                        return Err(Error::SplitFailure(format!(
                            "no eigenvalue within {tol:e} of mu_{n} = {target} for edge {}",
                            edge + 1
                        )))
                    }
                }
            }
        }
    }
    let mut deflated = AsymptoticTemplate::new(hconf);
    deflated.branches.retain(|b| b.mu_edge.is_none());
    let rest: Vec<Complex64> = remaining.into_iter().flatten().collect();
    let lambda_part = assign_numbering(&rest, &deflated)?;
    Ok(DegenerateSplit { mu_part, lambda_part })
}
