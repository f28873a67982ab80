use std::fmt::Write as _;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use hardcore::cluster::write_cluster_dump;
use hardcore::counting::ProbeLocation;
use hardcore::cumulants::write_decay_csv;
use hardcore::oracle::{exact_marginal, exact_z_complex};
use hardcore::{
    approx_log_z, certify_kp, check_corollary, check_main_condition, decay_experiment,
    enumerate_clusters, exact_xi, exact_z, zero_probe, BipartiteGraph, ClusterLimits,
    ComplexRegion, ConditionCheck, CorollaryPart, CountOptions, DecayQuery, Fugacities,
    KpCertificate, PolymerSampler, SamplerBackend, SamplerOptions, Side, Vertex,
};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::CliError;
use crate::Document;

/// Rounds to twelve significant digits for display, so `4.999999999999999`
/// prints as `5`.
fn short(x: f64) -> f64 {
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn check_json(c: &ConditionCheck) -> Value {
    json!({ "lhs": c.lhs, "rhs": c.rhs, "verdict": c.verdict, "holds": c.holds() })
}

fn certificate_text(cert: &KpCertificate) -> String {
    format!(
        "KP certificate: {:?}, η = {}, worst margin {:.4} ({})",
        cert.mode, cert.eta, cert.worst_margin, cert.provenance
    )
}

pub fn check(
    graph: &BipartiteGraph,
    lambda_l: f64,
    lambda_r: f64,
    eta: f64,
    k_max: usize,
) -> Result<Document, CliError> {
    let lam = Fugacities::new(lambda_l, lambda_r)?;
    let profile = graph.degree_profile()?;
    let bounds = profile.bounds();
    let main = check_main_condition(&bounds, &lam)?;
    let cert = certify_kp(graph, &lam, eta, k_max)?;

    let mut text = format!(
        "graph: n_L = {}, n_R = {}, Δ_L = {}, δ_R = {}, Δ_R = {}\n",
        graph.n_left(),
        graph.n_right(),
        profile.delta_l_max,
        profile.delta_r_min,
        profile.delta_r_max
    );
    let _ = writeln!(
        text,
        "main condition: 6·Δ_L·Δ_R·λ_R = {} <= (1+λ_L)^(δ_R/Δ_L) = {}: {}",
        short(main.lhs),
        short(main.rhs),
        main.holds()
    );
    let mut parts = Vec::new();
    for index in 1..=3u8 {
        let part = CorollaryPart::from_index(index).expect("parts 1 to 3 exist");
        match check_corollary(&bounds, &lam, part) {
            Ok(c) => {
                let _ = writeln!(
                    text,
                    "specialization {index} ({part:?}): {} <= {}: {}",
                    short(c.lhs),
                    short(c.rhs),
                    c.holds()
                );
                parts.push(json!({ "part": index, "name": part, "applies": true, "check": check_json(&c) }));
            }
            Err(e) => {
                let _ = writeln!(
                    text,
                    "specialization {index} ({part:?}): not applicable ({e})"
                );
                parts.push(json!({ "part": index, "name": part, "applies": false, "reason": e.to_string() }));
            }
        }
    }
    let _ = writeln!(text, "{}", certificate_text(&cert));
    let json = json!({
        "n_L": graph.n_left(),
        "n_R": graph.n_right(),
        "degree_profile": profile,
        "lambda_l": lambda_l,
        "lambda_r": lambda_r,
        "main_condition": check_json(&main),
        "specializations": parts,
        "kp_certificate": cert,
    });
    Ok(Document::Report { text, json })
}

pub struct CountArgs<'a> {
    pub lambda_l: f64,
    pub lambda_r: f64,
    pub eps: f64,
    pub eta: f64,
    pub k_max: usize,
    pub m: Option<usize>,
    pub max_clusters: Option<u64>,
    pub dump: Option<&'a Path>,
}

pub fn count(graph: &BipartiteGraph, args: CountArgs<'_>) -> Result<Document, CliError> {
    let lam = Fugacities::new(args.lambda_l, args.lambda_r)?;
    let mut options = CountOptions {
        eta: args.eta,
        m: args.m,
        k_max: args.k_max,
        ..CountOptions::default()
    };
    if let Some(cap) = args.max_clusters {
        options.limits = ClusterLimits { max_clusters: cap };
    }
    let result = approx_log_z(graph, &lam, args.eps, &options)?;
    if result.degraded {
        eprintln!(
            "warning: cluster cap reached; used m = {} instead of the required {}, error bound {:e} exceeds ε",
            result.m_used, result.m_required, result.error_bound
        );
    }
    if let Some(path) = args.dump {
        let clusters = enumerate_clusters(graph, &lam, result.m_used, options.limits)?;
        let file = File::create(path).map_err(|source| CliError::Write {
            path: path.to_path_buf(),
            source,
        })?;
        write_cluster_dump(&mut BufWriter::new(file), &clusters).map_err(|source| {
            CliError::Write {
                path: path.to_path_buf(),
                source,
            }
        })?;
    }
    let report = result.report();
    let text = format!(
        "log Z ≈ {} (ε = {}, m = {}, required m = {}, error bound {:e})\n{}\n",
        result.log_z_estimate,
        result.epsilon,
        result.m_used,
        result.m_required,
        result.error_bound,
        certificate_text(&result.certificate)
    );
    let json = serde_json::to_value(report).expect("report serializes");
    Ok(Document::Report { text, json })
}

pub fn exact_real(
    graph: &BipartiteGraph,
    lambda_l: f64,
    lambda_r: f64,
    marginals: bool,
) -> Result<Document, CliError> {
    let lam = Fugacities::new(lambda_l, lambda_r)?;
    let z = exact_z(graph, &lam)?;
    let log_z = z.ln_abs;
    // Ξ is only available for modest n_R; Z itself does not need it
    let log_xi = exact_xi(graph, &lam).ok().map(f64::ln);
    let mut text = format!("Z = {}\nlog Z = {log_z}\n", short(z.value()));
    if let Some(x) = log_xi {
        let _ = writeln!(text, "log Ξ = {x}");
    }
    let mut json = json!({
        "Z": z.value(),
        "log_Z": log_z,
        "log_Xi": log_xi,
        "n_L": graph.n_left(),
        "n_R": graph.n_right(),
    });
    if marginals {
        let mut rows = Vec::new();
        for v in graph.vertices() {
            let mu = exact_marginal(graph, &lam, &[v])?;
            let _ = writeln!(text, "Pr[{v} ∈ I] = {mu}");
            rows.push(json!({ "vertex": vertex_json(v), "probability": mu }));
        }
        json["marginals"] = Value::Array(rows);
    }
    Ok(Document::Report { text, json })
}

pub fn exact_complex(
    graph: &BipartiteGraph,
    lambda_l: (f64, f64),
    lambda_r: (f64, f64),
) -> Result<Document, CliError> {
    let lam = Fugacities::complex(
        Complex64::new(lambda_l.0, lambda_l.1),
        Complex64::new(lambda_r.0, lambda_r.1),
    )?;
    let z = exact_z_complex(graph, &lam)?;
    let text = format!("Z = {} + {}i\n|Z| = {}\n", z.re, z.im, z.norm());
    let json = json!({
        "Z_re": z.re,
        "Z_im": z.im,
        "abs_Z": z.norm(),
        "n_L": graph.n_left(),
        "n_R": graph.n_right(),
    });
    Ok(Document::Report { text, json })
}

fn vertex_json(v: Vertex) -> Value {
    let side = match v.side {
        Side::Left => "L",
        Side::Right => "R",
    };
    json!([side, v.index])
}

pub struct SampleArgs {
    pub lambda_l: f64,
    pub lambda_r: f64,
    pub eps: f64,
    pub draws: usize,
    pub seed: u64,
    pub exact_backend: bool,
    pub eta: f64,
    pub k_max: usize,
    pub m: Option<usize>,
    pub max_m: usize,
}

pub fn sample(graph: &BipartiteGraph, args: SampleArgs) -> Result<Document, CliError> {
    let lam = Fugacities::new(args.lambda_l, args.lambda_r)?;
    let options = SamplerOptions {
        backend: if args.exact_backend {
            SamplerBackend::Exact
        } else {
            SamplerBackend::Truncated
        },
        eta: args.eta,
        k_max: args.k_max,
        m: args.m,
        max_m: args.max_m,
        ..SamplerOptions::default()
    };
    let mut sampler = PolymerSampler::new(graph, &lam, args.eps, &options)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut out = String::new();
    let (mut left, mut right) = (0usize, 0usize);
    for _ in 0..args.draws {
        let set = sampler.sample_set(&mut rng)?;
        left += set.iter().filter(|v| v.side == Side::Left).count();
        right += set.iter().filter(|v| v.side == Side::Right).count();
        let line: Vec<Value> = set.into_iter().map(vertex_json).collect();
        let _ = writeln!(out, "{}", Value::Array(line));
    }
    let n = args.draws.max(1) as f64;
    let summary = json!({
        "summary": {
            "draws": args.draws,
            "seed": args.seed,
            "backend": sampler.backend(),
            "epsilon": args.eps,
            "m_used": sampler.m_used(),
            "m_required": sampler.m_required(),
            "tv_bound": sampler.tv_bound(),
            "certificate_mode": sampler.certificate().map(|c| c.mode),
            "mean_left": left as f64 / n,
            "mean_right": right as f64 / n,
        }
    });
    let _ = writeln!(out, "{summary}");
    Ok(Document::Raw(out))
}

#[allow(clippy::too_many_arguments)]
pub fn decay(
    graph: &BipartiteGraph,
    lambda_l: f64,
    lambda_r: f64,
    m: usize,
    max_size: usize,
    eta: f64,
    k_max: usize,
    json: bool,
) -> Result<Document, CliError> {
    let lam = Fugacities::new(lambda_l, lambda_r)?;
    let cert = certify_kp(graph, &lam, eta, k_max)?;
    let n = graph.n_right();
    let mut queries = Vec::new();
    let mut set = Vec::new();
    right_subsets(n, max_size, 0, &mut set, &mut queries);
    for u in 0..n {
        for v in u + 1..n {
            queries.push(DecayQuery::Correlation {
                a: vec![Vertex::right(u)],
                b: vec![Vertex::right(v)],
            });
        }
    }
    let rows = decay_experiment(graph, &lam, &queries, m, &cert, ClusterLimits::default())?;
    if json {
        let value = serde_json::to_value(&rows).expect("rows serialize");
        let mut s = serde_json::to_string_pretty(&value).expect("JSON values serialize");
        s.push('\n');
        return Ok(Document::Raw(s));
    }
    let mut buf = Vec::new();
    write_decay_csv(&mut buf, &rows).expect("writing to memory cannot fail");
    Ok(Document::Raw(String::from_utf8(buf).expect("CSV is UTF-8")))
}

/// Nonempty subsets of `0..n` of size at most `k`, in lexicographic order.
fn right_subsets(
    n: usize,
    k: usize,
    start: usize,
    set: &mut Vec<usize>,
    out: &mut Vec<DecayQuery>,
) {
    for v in start..n {
        set.push(v);
        out.push(DecayQuery::Cumulant(set.clone()));
        if set.len() < k {
            right_subsets(n, k, v + 1, set, out);
        }
        set.pop();
    }
}

pub fn zeros(
    graph: &BipartiteGraph,
    big_l: f64,
    big_r: f64,
    samples: usize,
    seed: u64,
) -> Result<Document, CliError> {
    let region = ComplexRegion::new(big_l, big_r)?;
    let report = zero_probe(graph, &region, samples, seed)?;
    let mut text = format!(
        "region: |λ_R| <= {big_r}, |1+λ_L| >= {}; condition {} <= {}: {}\n",
        1.0 + big_l,
        short(report.region_check.lhs),
        short(report.region_check.rhs),
        report.region_check.holds()
    );
    let _ = writeln!(
        text,
        "{} points, min |Z| = {:e}",
        report.samples, report.min_abs_z
    );
    if let Some(p) = &report.argmin {
        let where_ = match p.location {
            ProbeLocation::Boundary => "boundary",
            ProbeLocation::Interior => "interior",
        };
        let _ = writeln!(
            text,
            "argmin ({where_}): λ_L = {} + {}i, λ_R = {} + {}i",
            p.lambda_l.0, p.lambda_l.1, p.lambda_r.0, p.lambda_r.1
        );
    }
    let _ = writeln!(text, "zeros found: {}", report.zeros.len());
    let json = serde_json::to_value(&report).expect("report serializes");
    Ok(Document::Report { text, json })
}
