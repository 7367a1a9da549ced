//! Nelder-Mead simplex descent for the three nonlinear parameters.

/// Termination settings.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SimplexOptions {
    /// Stop once `f_worst - f_best <= rel_tol * |f_best| + abs_tol`.
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_iterations: usize,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct SimplexOutcome {
    pub x: [f64; 3],
    pub fx: f64,
    pub iterations: usize,
    pub converged: bool,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

fn lerp(from: &[f64; 3], to: &[f64; 3], t: f64) -> [f64; 3] {
    std::array::from_fn(|k| from[k] + t * (to[k] - from[k]))
}

/// Minimises `f` from `x0`. Infeasible points are expected to evaluate to `+inf`.
///
/// Each initial edge goes `+step[k]` along axis `k`, or `-step[k]` when the positive
/// probe is infeasible. The best vertex never gets worse, so `fx <= f(x0)`.
pub(crate) fn minimize<F>(mut f: F, x0: [f64; 3], step: [f64; 3], opts: SimplexOptions) -> SimplexOutcome
where
    F: FnMut(&[f64; 3]) -> f64,
{
    let mut vertices = [x0; 4];
    let mut values = [f64::INFINITY; 4];
    values[0] = f(&x0);
    for k in 0..3 {
        let mut v = x0;
        v[k] += step[k];
        let mut fv = f(&v);
        if !fv.is_finite() {
            let mut w = x0;
            w[k] -= step[k];
            let fw = f(&w);
            if fw < fv || fv.is_nan() {
                v = w;
                fv = fw;
            }
        }
        vertices[k + 1] = v;
        values[k + 1] = fv;
    }

    let mut iterations = 0;
    let mut converged = false;
    loop {
        // Stable ordering keeps runs reproducible when values tie.
        let mut order = [0usize, 1, 2, 3];
        order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
        vertices = order.map(|i| vertices[i]);
        values = order.map(|i| values[i]);

        let (best, worst) = (values[0], values[3]);
        if best.is_finite()
            && worst.is_finite()
            && worst - best <= opts.rel_tol * best.abs() + opts.abs_tol
        {
            converged = true;
            break;
        }
        if iterations >= opts.max_iterations {
            break;
        }
        iterations += 1;

        let centroid: [f64; 3] =
            std::array::from_fn(|k| (vertices[0][k] + vertices[1][k] + vertices[2][k]) / 3.0);
        let reflected = lerp(&centroid, &vertices[3], -REFLECT);
        let f_reflected = f(&reflected);

        if f_reflected < values[0] {
            let expanded = lerp(&centroid, &vertices[3], -EXPAND);
            let f_expanded = f(&expanded);
            if f_expanded < f_reflected {
                vertices[3] = expanded;
                values[3] = f_expanded;
            } else {
                vertices[3] = reflected;
                values[3] = f_reflected;
            }
            continue;
        }
        if f_reflected < values[2] {
            vertices[3] = reflected;
            values[3] = f_reflected;
            continue;
        }

        let (contracted, f_contracted) = if f_reflected < values[3] {
            let c = lerp(&centroid, &reflected, CONTRACT);
            let fc = f(&c);
            (c, fc)
        } else {
            let c = lerp(&centroid, &vertices[3], CONTRACT);
            let fc = f(&c);
            (c, fc)
        };
        if f_contracted < values[3].min(f_reflected) {
            vertices[3] = contracted;
            values[3] = f_contracted;
            continue;
        }

        for i in 1..4 {
            vertices[i] = lerp(&vertices[0], &vertices[i], SHRINK);
            values[i] = f(&vertices[i]);
        }
        if vertices[1..]
            .iter()
            .all(|v| v.iter().zip(&vertices[0]).all(|(a, b)| a == b))
        {
            // Collapsed onto a single point: no further progress is possible.
            converged = values[0].is_finite();
            break;
        }
    }

    SimplexOutcome {
        x: vertices[0],
        fx: values[0],
        iterations,
        converged,
    }
}
