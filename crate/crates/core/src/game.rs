//! Differential game definitions and the built-in benchmark games.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::geometry::BoxRegion;

/// `f(x, u, w)` written into the output slice.
pub type DynamicsFn = dyn Fn(&[f64], &[f64], &[f64], &mut [f64]) + Send + Sync;
pub type StatePredicate = dyn Fn(&[f64]) -> bool + Send + Sync;
/// Euclidean distance from a state to the closure of the goal set.
pub type DistanceFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// Admissible control set of one player.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ControlSpace {
    /// Axis-aligned box in `ℝ^m`.
    Box(BoxRegion),
    /// Heading angle in `[0, 2π)`.
    Angle,
    /// Explicit finite set of control vectors.
    Finite(Vec<Vec<f64>>),
}

impl ControlSpace {
    pub fn dim(&self) -> usize {
        match self {
            ControlSpace::Box(b) => b.dim(),
            ControlSpace::Angle => 1,
            ControlSpace::Finite(set) => set.first().map_or(0, Vec::len),
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, ControlSpace::Finite(set) if set.is_empty())
    }

    /// One uniform draw from the set.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match self {
            ControlSpace::Box(b) => {
                let mut out = vec![0.0; b.dim()];
                b.sample_into(rng, &mut out);
                out
            }
            ControlSpace::Angle => vec![rng.gen::<f64>() * TAU],
            ControlSpace::Finite(set) => set[rng.gen_range(0..set.len())].clone(),
        }
    }

    /// Uniform grid with `per_axis` values along each axis. Box axes include
    /// both endpoints; angles are spaced `2π / per_axis` starting at 0; finite
    /// sets are returned whole.
    pub fn grid(&self, per_axis: usize) -> Vec<Vec<f64>> {
        let per_axis = per_axis.max(1);
        match self {
            ControlSpace::Finite(set) => set.clone(),
            ControlSpace::Angle => (0..per_axis).map(|k| vec![TAU * k as f64 / per_axis as f64]).collect(),
            ControlSpace::Box(b) => {
                let axis_values: Vec<Vec<f64>> = (0..b.dim())
                    .map(|i| {
                        if per_axis == 1 {
                            vec![0.5 * (b.lo()[i] + b.hi()[i])]
                        } else {
                            (0..per_axis)
                                .map(|k| b.lo()[i] + b.extent(i) * k as f64 / (per_axis - 1) as f64)
                                .collect()
                        }
                    })
                    .collect();
                let mut out = vec![Vec::new()];
                for values in &axis_values {
                    out = out
                        .into_iter()
                        .flat_map(|prefix| {
                            values.iter().map(move |&v| {
                                let mut p = prefix.clone();
                                p.push(v);
                                p
                            })
                        })
                        .collect();
                }
                out
            }
        }
    }
}

/// A time-optimal approach-evasion game: the angel steers toward the open goal
/// set while staying in the closed free set; the demon opposes.
#[derive(Clone)]
pub struct GameDef {
    id: String,
    domain: BoxRegion,
    dynamics: Arc<DynamicsFn>,
    angel_controls: ControlSpace,
    demon_controls: ControlSpace,
    in_free: Arc<StatePredicate>,
    in_goal: Arc<StatePredicate>,
    goal_distance: Option<Arc<DistanceFn>>,
    speed_bound: f64,
    lipschitz: f64,
}

impl fmt::Debug for GameDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GameDef")
            .field("id", &self.id)
            .field("domain", &self.domain)
            .field("angel_controls", &self.angel_controls)
            .field("demon_controls", &self.demon_controls)
            .field("speed_bound", &self.speed_bound)
            .field("lipschitz", &self.lipschitz)
            .finish_non_exhaustive()
    }
}

pub struct GameBuilder {
    id: String,
    domain: BoxRegion,
    dynamics: Option<Arc<DynamicsFn>>,
    angel_controls: Option<ControlSpace>,
    demon_controls: Option<ControlSpace>,
    in_free: Arc<StatePredicate>,
    in_goal: Option<Arc<StatePredicate>>,
    goal_distance: Option<Arc<DistanceFn>>,
    speed_bound: Option<f64>,
    lipschitz: f64,
}

impl GameBuilder {
    pub fn dynamics(mut self, f: impl Fn(&[f64], &[f64], &[f64], &mut [f64]) + Send + Sync + 'static) -> Self {
        self.dynamics = Some(Arc::new(f));
        self
    }

    pub fn angel_controls(mut self, c: ControlSpace) -> Self {
        self.angel_controls = Some(c);
        self
    }

    pub fn demon_controls(mut self, c: ControlSpace) -> Self {
        self.demon_controls = Some(c);
        self
    }

    /// Defaults to the whole state space.
    pub fn free(mut self, p: impl Fn(&[f64]) -> bool + Send + Sync + 'static) -> Self {
        self.in_free = Arc::new(p);
        self
    }

    pub fn goal(mut self, p: impl Fn(&[f64]) -> bool + Send + Sync + 'static) -> Self {
        self.in_goal = Some(Arc::new(p));
        self
    }

    /// Optional exact distance to the goal. Without it, goal halos are
    /// approximated from the goal samples seen so far.
    pub fn goal_distance(mut self, d: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        self.goal_distance = Some(Arc::new(d));
        self
    }

    pub fn speed_bound(mut self, m: f64) -> Self {
        self.speed_bound = Some(m);
        self
    }

    pub fn lipschitz(mut self, l: f64) -> Self {
        self.lipschitz = l;
        self
    }

    pub fn build(self) -> Result<GameDef> {
        let missing = |what: &str| Error::Config(format!("game `{}` is missing {what}", self.id));
        let dynamics = self.dynamics.clone().ok_or_else(|| missing("dynamics"))?;
        let angel_controls = self.angel_controls.clone().ok_or_else(|| missing("angel controls"))?;
        let demon_controls = self.demon_controls.clone().ok_or_else(|| missing("demon controls"))?;
        let in_goal = self.in_goal.clone().ok_or_else(|| missing("a goal predicate"))?;
        let speed_bound = self.speed_bound.ok_or_else(|| missing("a speed bound"))?;
        if angel_controls.is_empty() || demon_controls.is_empty() {
            return domain("control sets must be nonempty");
        }
        if !(speed_bound >= 0.0 && self.lipschitz >= 0.0) {
            return domain("speed bound and Lipschitz constant must be nonnegative");
        }
        Ok(GameDef {
            id: self.id,
            domain: self.domain,
            dynamics,
            angel_controls,
            demon_controls,
            in_free: self.in_free,
            in_goal,
            goal_distance: self.goal_distance,
            speed_bound,
            lipschitz: self.lipschitz,
        })
    }
}

impl GameDef {
    pub fn builder(id: impl Into<String>, domain: BoxRegion) -> GameBuilder {
        GameBuilder {
            id: id.into(),
            domain,
            dynamics: None,
            angel_controls: None,
            demon_controls: None,
            in_free: Arc::new(|_| true),
            in_goal: None,
            goal_distance: None,
            speed_bound: None,
            lipschitz: 0.0,
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn domain(&self) -> &BoxRegion {
        &self.domain
    }

    #[inline]
    pub fn dynamics_into(&self, x: &[f64], u: &[f64], w: &[f64], out: &mut [f64]) {
        (self.dynamics)(x, u, w, out)
    }

    pub fn dynamics(&self, x: &[f64], u: &[f64], w: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.dynamics_into(x, u, w, &mut out);
        out
    }

    pub fn angel_controls(&self) -> &ControlSpace {
        &self.angel_controls
    }

    pub fn demon_controls(&self) -> &ControlSpace {
        &self.demon_controls
    }

    #[inline]
    pub fn in_free(&self, x: &[f64]) -> bool {
        (self.in_free)(x)
    }

    #[inline]
    pub fn in_goal(&self, x: &[f64]) -> bool {
        (self.in_goal)(x)
    }

    pub fn goal_distance(&self, x: &[f64]) -> Option<f64> {
        self.goal_distance.as_ref().map(|d| d(x))
    }

    pub fn has_goal_distance(&self) -> bool {
        self.goal_distance.is_some()
    }

    /// `M`, an upper bound on `‖f‖` over domain × controls.
    pub fn speed_bound(&self) -> f64 {
        self.speed_bound
    }

    /// `ℓ`, the Lipschitz constant of `f` in the state.
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }
}

/// Built-in game ids accepted by [`game_by_id`].
pub const BUILTIN_GAMES: &[&str] = &["fence", "chauffeur", "toy1d"];

pub fn game_by_id(id: &str) -> Result<GameDef> {
    match id {
        "fence" => Ok(make_fence_escape()),
        "chauffeur" => Ok(make_homicidal_chauffeur()),
        "chauffeur5d" => Ok(make_homicidal_chauffeur_5d(ChauffeurParams::default())),
        "toy1d" => Ok(make_toy_1d(vec![vec![-1.0], vec![1.0]])),
        other => Err(Error::UnknownGame(other.to_string())),
    }
}

pub const FENCE_LENGTH: f64 = 10.0;
pub const FENCE_BLOCK_DISTANCE: f64 = 1.0;

/// Fence escape: pursuer and evader on opposite sides of a fence spanning
/// `[0, 10]`. State `(x_p, x_e)`. The evader (angel) commands `u_e`, the
/// pursuer (demon) `u_p`, both with `|·| ≤ 1`.
pub fn make_fence_escape() -> GameDef {
    let unit = || ControlSpace::Box(BoxRegion::new(vec![-1.0], vec![1.0]).expect("static box"));
    GameDef::builder("fence", BoxRegion::cube(2, -2.0, 12.0).expect("static box"))
        .dynamics(|_x, u, w, out| {
            out[0] = w[0];
            out[1] = u[0];
        })
        .angel_controls(unit())
        .demon_controls(unit())
        .goal(fence_goal)
        .goal_distance(fence_goal_distance)
        .speed_bound(2f64.sqrt())
        .lipschitz(0.0)
        .build()
        .expect("fence game is well formed")
}

fn fence_goal(x: &[f64]) -> bool {
    let (xp, xe) = (x[0], x[1]);
    (xe < 0.0 || xe > FENCE_LENGTH) && (xe - xp).abs() > FENCE_BLOCK_DISTANCE
}

/// The fence goal is a union of four wedges `{a·x ≤ b, c·x ≤ e}`.
fn fence_goal_distance(x: &[f64]) -> f64 {
    const WEDGES: [([f64; 2], f64, [f64; 2], f64); 4] = [
        ([0.0, 1.0], 0.0, [1.0, -1.0], -FENCE_BLOCK_DISTANCE),
        ([0.0, 1.0], 0.0, [-1.0, 1.0], -FENCE_BLOCK_DISTANCE),
        ([0.0, -1.0], -FENCE_LENGTH, [1.0, -1.0], -FENCE_BLOCK_DISTANCE),
        ([0.0, -1.0], -FENCE_LENGTH, [-1.0, 1.0], -FENCE_BLOCK_DISTANCE),
    ];
    WEDGES
        .iter()
        .map(|&(a, b, c, e)| wedge_distance([x[0], x[1]], a, b, c, e))
        .fold(f64::INFINITY, f64::min)
}

/// Distance from `p` to `{q : a·q ≤ b, c·q ≤ e}` for non-parallel normals.
fn wedge_distance(p: [f64; 2], a: [f64; 2], b: f64, c: [f64; 2], e: f64) -> f64 {
    let dot = |n: [f64; 2], q: [f64; 2]| n[0] * q[0] + n[1] * q[1];
    let tol = 1e-12;
    let inside = |q: [f64; 2]| dot(a, q) <= b + tol && dot(c, q) <= e + tol;
    if inside(p) {
        return 0.0;
    }
    let dist = |q: [f64; 2]| ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
    let project = |n: [f64; 2], k: f64| {
        let s = (dot(n, p) - k) / dot(n, n);
        [p[0] - s * n[0], p[1] - s * n[1]]
    };
    let det = a[0] * c[1] - a[1] * c[0];
    let vertex = [(b * c[1] - a[1] * e) / det, (a[0] * e - b * c[0]) / det];
    let mut best = dist(vertex);
    for q in [project(a, b), project(c, e)] {
        if inside(q) {
            best = best.min(dist(q));
        }
    }
    best
}

/// Parameters of the reduced homicidal chauffeur game.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChauffeurParams {
    /// Maximum pursuer turn rate.
    pub omega: f64,
    pub v_e: f64,
    pub v_p: f64,
    /// Escape radius (Euclidean).
    pub r: f64,
    /// Capture half-width (sup norm).
    pub r_p: f64,
}

impl Default for ChauffeurParams {
    fn default() -> Self {
        Self { omega: 5.0, v_e: 0.5, v_p: 1.0, r: 1.0, r_p: 0.05 }
    }
}

pub fn make_homicidal_chauffeur() -> GameDef {
    make_homicidal_chauffeur_with(ChauffeurParams::default())
}

/// Homicidal chauffeur in pursuer-fixed coordinates `q = (x, y)`:
///
/// ```text
/// ẋ =  u_p y + v_e cos u_e − v_p
/// ẏ = −u_p x − v_e sin u_e
/// ```
///
/// The pursuer (angel) commands the turn rate `u_p ∈ [−ω, ω]`, the evader
/// (demon) its heading `u_e`.
pub fn make_homicidal_chauffeur_with(p: ChauffeurParams) -> GameDef {
    let half = 1.2 * p.r;
    let domain = BoxRegion::cube(2, -half, half).expect("static box");
    // ‖u_p (y, −x)‖ ≤ ω ‖q‖ and the constant part is bounded by v_e + v_p.
    let speed = p.omega * half * 2f64.sqrt() + p.v_e + p.v_p;
    GameDef::builder("chauffeur", domain)
        .dynamics(move |q, u, w, out| {
            let (x, y) = (q[0], q[1]);
            let (up, ue) = (u[0], w[0]);
            out[0] = up * y + p.v_e * ue.cos() - p.v_p;
            out[1] = -up * x - p.v_e * ue.sin();
        })
        .angel_controls(ControlSpace::Box(BoxRegion::new(vec![-p.omega], vec![p.omega]).expect("static box")))
        .demon_controls(ControlSpace::Angle)
        .free(move |q| (q[0] * q[0] + q[1] * q[1]).sqrt() <= p.r)
        .goal(move |q| q[0].abs().max(q[1].abs()) < p.r_p)
        .goal_distance(move |q| q.iter().map(|c| (c.abs() - p.r_p).max(0.0).powi(2)).sum::<f64>().sqrt())
        .speed_bound(speed)
        .lipschitz(p.omega)
        .build()
        .expect("chauffeur game is well formed")
}

/// The unreduced chauffeur, state `(x_p, y_p, θ, x_e, y_e)`.
pub fn make_homicidal_chauffeur_5d(p: ChauffeurParams) -> GameDef {
    let relative = |s: &[f64]| {
        let (dx, dy) = (s[3] - s[0], s[4] - s[1]);
        let (sin, cos) = s[2].sin_cos();
        (cos * dx + sin * dy, -sin * dx + cos * dy)
    };
    let lo = vec![-2.0, -2.0, -PI, -2.0, -2.0];
    let hi = vec![2.0, 2.0, PI, 2.0, 2.0];
    GameDef::builder("chauffeur5d", BoxRegion::new(lo, hi).expect("static box"))
        .dynamics(move |s, u, w, out| {
            let (sin, cos) = s[2].sin_cos();
            out[0] = p.v_p * cos;
            out[1] = p.v_p * sin;
            out[2] = u[0];
            out[3] = p.v_e * w[0].cos();
            out[4] = p.v_e * w[0].sin();
        })
        .angel_controls(ControlSpace::Box(BoxRegion::new(vec![-p.omega], vec![p.omega]).expect("static box")))
        .demon_controls(ControlSpace::Angle)
        .free(move |s| {
            let (x, y) = relative(s);
            (x * x + y * y).sqrt() <= p.r
        })
        .goal(move |s| {
            let (x, y) = relative(s);
            x.abs().max(y.abs()) < p.r_p
        })
        .speed_bound((p.v_p * p.v_p + p.omega * p.omega + p.v_e * p.v_e).sqrt())
        .lipschitz(p.v_p)
        .build()
        .expect("5-D chauffeur is well formed")
}

/// One-dimensional test game on `[0, 1]` with goal `[0, 0.1)` and `ẋ = u`.
/// The minimum time is `x − 0.1` whenever `−1` is an admissible control.
pub fn make_toy_1d(angel: Vec<Vec<f64>>) -> GameDef {
    GameDef::builder("toy1d", BoxRegion::cube(1, 0.0, 1.0).expect("static box"))
        .dynamics(|_x, u, _w, out| out[0] = u[0])
        .angel_controls(ControlSpace::Finite(angel))
        .demon_controls(ControlSpace::Finite(vec![vec![0.0]]))
        .goal(|x| x[0] < 0.1)
        .goal_distance(|x| (x[0] - 0.1).max(0.0))
        .speed_bound(1.0)
        .lipschitz(0.0)
        .build()
        .expect("toy game is well formed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::norm;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fence_examples() {
        let g = make_fence_escape();
        assert!(g.in_goal(&[5.0, 11.0]));
        assert!(!g.in_goal(&[10.5, 11.0]));
        // Pursuer velocity u_p = 1 (demon), evader u_e = -1 (angel).
        assert_eq!(g.dynamics(&[3.0, 4.0], &[-1.0], &[1.0]), vec![1.0, -1.0]);
        assert_eq!(g.speed_bound(), 2f64.sqrt());
        assert_eq!(g.lipschitz(), 0.0);
        assert_eq!(g.domain().lo(), &[-2.0, -2.0]);
        assert_eq!(g.domain().hi(), &[12.0, 12.0]);
    }

    #[test]
    fn chauffeur_examples() {
        let p = ChauffeurParams::default();
        assert_eq!((p.omega, p.v_e, p.v_p, p.r, p.r_p), (5.0, 0.5, 1.0, 1.0, 0.05));
        let g = make_homicidal_chauffeur();
        let f = g.dynamics(&[0.5, 0.2], &[5.0], &[0.0]);
        assert!((f[0] - 0.5).abs() < 1e-15);
        assert!((f[1] + 2.5).abs() < 1e-15);
        assert!(g.in_goal(&[0.03, -0.04]));
        assert!(!g.in_goal(&[0.05, 0.0]));
        assert!(g.in_free(&[0.6, 0.8]));
        assert!(!g.in_free(&[0.8, 0.8]));
        assert_eq!(g.lipschitz(), 5.0);
    }

    #[test]
    fn registry() {
        for id in BUILTIN_GAMES {
            assert_eq!(game_by_id(id).unwrap().id(), *id);
        }
        assert!(matches!(game_by_id("go"), Err(Error::UnknownGame(_))));
    }

    #[test]
    fn empty_controls_rejected() {
        let res = GameDef::builder("bad", BoxRegion::cube(1, 0.0, 1.0).unwrap())
            .dynamics(|_, _, _, o| o[0] = 0.0)
            .angel_controls(ControlSpace::Finite(vec![]))
            .demon_controls(ControlSpace::Angle)
            .goal(|_| false)
            .speed_bound(0.0)
            .build();
        assert!(res.is_err());
    }

    #[test]
    fn control_grids() {
        let g = make_homicidal_chauffeur();
        let u = g.angel_controls().grid(9);
        assert_eq!(u.len(), 9);
        assert_eq!(u[0], vec![-5.0]);
        assert_eq!(u[8], vec![5.0]);
        let w = g.demon_controls().grid(16);
        assert_eq!(w.len(), 16);
        assert_eq!(w[4], vec![TAU / 4.0]);
        let square = ControlSpace::Box(BoxRegion::cube(2, 0.0, 1.0).unwrap()).grid(3);
        assert_eq!(square.len(), 9);
        assert_eq!(square[5], vec![0.5, 1.0]);
    }

    fn random_triple(g: &GameDef, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let mut x = vec![0.0; g.dim()];
        g.domain().sample_into(rng, &mut x);
        (x, g.angel_controls().sample(rng), g.demon_controls().sample(rng))
    }

    #[test]
    fn speed_bound_holds_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for g in [make_fence_escape(), make_homicidal_chauffeur(), make_homicidal_chauffeur_5d(ChauffeurParams::default())] {
            for _ in 0..1000 {
                let (x, u, w) = random_triple(&g, &mut rng);
                assert!(norm(&g.dynamics(&x, &u, &w)) <= g.speed_bound() + 1e-12, "{}", g.id());
            }
        }
    }

    #[test]
    fn chauffeur_lipschitz_on_random_pairs() {
        let g = make_homicidal_chauffeur();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..1000 {
            let (x, u, w) = random_triple(&g, &mut rng);
            let mut y = vec![0.0; 2];
            g.domain().sample_into(&mut rng, &mut y);
            let fx = g.dynamics(&x, &u, &w);
            let fy = g.dynamics(&y, &u, &w);
            let df: Vec<f64> = fx.iter().zip(&fy).map(|(a, b)| a - b).collect();
            let dx: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
            assert!(norm(&df) <= g.lipschitz() * norm(&dx) + 1e-12);
        }
    }

    #[test]
    fn goal_distances_agree_with_sampling() {
        // Brute force: distance to the goal points of a fine lattice.
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for g in [make_fence_escape(), make_homicidal_chauffeur()] {
            let b = g.domain();
            let n = 700;
            let mut goal_pts = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    let q = [
                        b.lo()[0] + b.extent(0) * i as f64 / (n - 1) as f64,
                        b.lo()[1] + b.extent(1) * j as f64 / (n - 1) as f64,
                    ];
                    if g.in_goal(&q) {
                        goal_pts.push(q);
                    }
                }
            }
            let cell = b.extent(0) / (n - 1) as f64;
            let mut x = vec![0.0; 2];
            for _ in 0..60 {
                b.sample_into(&mut rng, &mut x);
                let exact = g.goal_distance(&x).unwrap();
                let brute = goal_pts
                    .iter()
                    .map(|q| ((x[0] - q[0]).powi(2) + (x[1] - q[1]).powi(2)).sqrt())
                    .fold(f64::INFINITY, f64::min);
                if g.in_goal(&x) {
                    assert_eq!(exact, 0.0);
                }
                assert!((exact - brute).abs() <= 1.5 * cell, "{} {x:?}: {exact} vs {brute}", g.id());
            }
        }
    }

    #[test]
    fn goal_states_lie_in_domain_for_builtins() {
        // Goal membership is only ever queried inside the domain box; check
        // that each goal actually intersects it.
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for g in [make_fence_escape(), make_homicidal_chauffeur()] {
            let mut hits = 0;
            let mut x = vec![0.0; 2];
            for _ in 0..20_000 {
                g.domain().sample_into(&mut rng, &mut x);
                hits += g.in_goal(&x) as usize;
            }
            assert!(hits > 0, "{}", g.id());
        }
    }
}
