//! Assembled networks with a batched forward pass and hand-derived backward
//! pass over a flat parameter vector.
//!
//! Parameter order follows [`ParamLayout`]: for each layer, the `n_out × n_in`
//! edge blocks (output index major), then the per-feature parameters of the
//! following normalization layer if there is one.
//!
//! Complex edge block: `2G²` interleaved `(re, im)` RBF weights, then
//! `[w.re, w.im, β.re, β.im]` (complex-weight residual) or
//! `[w1, w2, β.re, β.im]` (real-weight residual).
//! Complex→real edge block: `G²` real RBF weights, then
//! `[w.re, w.im, β.re]` or `[w1, w2, β.re]`.
//! Real edge block (FastKAN): `G` RBF weights, then the SiLU weight.
//!
//! The Gaussian kernel over the complex plane factorises as
//! `exp(-(a-g_u)²/bw²)·exp(-(b-g_v)²/bw²)`, so each input needs only `2G`
//! exponentials, shared by every outgoing edge.

use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::csilu::{CsiluParams, CsiluVariant};
use super::edge::{EdgeBank, EdgeFunction, OutputDomain};
use super::rbf::{silu, silu_derivative};
use super::spec::{EdgeKind, LayerLayout, ModelSpec, ParamLayout};
use crate::error::{CvkanError, Result};
use crate::norm::{
    backward_feature, forward_eval_feature, forward_train_feature, FeatureCache, NormLayer,
    NormMode, RunningStats, DEFAULT_EPS, DEFAULT_MOMENTUM,
};
use crate::numerics::{ComplexBatch, ComplexScalar};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct CvkanModel {
    spec: ModelSpec,
    layout: ParamLayout,
    params: Vec<f64>,
    /// Running statistics per layer; empty for layers without normalization.
    running: Vec<Vec<RunningStats>>,
    momentum: f64,
    eps: f64,
    axis: Vec<f64>,
}

/// Saved activations of one train-mode forward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    rows: usize,
    layers: Vec<LayerCache>,
}

#[derive(Debug, Clone)]
struct LayerCache {
    basis: Vec<f64>,
    act: Vec<[f64; 4]>,
    norm: Vec<FeatureCache>,
}

/// Per-edge and per-vertex values of an eval-mode pass.
#[derive(Debug, Clone)]
pub struct ModelTrace {
    pub rows: usize,
    /// `edge_outputs[l][(q * n_in + p) * rows + s]`.
    pub edge_outputs: Vec<Vec<ComplexScalar>>,
    /// `vertex_values[l][i * rows + s]`, for every layer of vertices including
    /// the inputs (post-normalization for hidden layers).
    pub vertex_values: Vec<Vec<ComplexScalar>>,
}

impl ModelTrace {
    pub fn edge_values(&self, layer: usize, q: usize, p: usize, n_in: usize) -> &[ComplexScalar] {
        let start = (q * n_in + p) * self.rows;
        &self.edge_outputs[layer][start..start + self.rows]
    }

    pub fn vertex(&self, layer: usize, i: usize) -> &[ComplexScalar] {
        &self.vertex_values[layer][i * self.rows..(i + 1) * self.rows]
    }
}

#[inline]
fn fill_axis_basis(x: f64, axis: &[f64], bw2: f64, value: &mut [f64], deriv: &mut [f64]) {
    for ((g, v), d) in axis.iter().zip(value.iter_mut()).zip(deriv.iter_mut()) {
        let t = x - g;
        let e = (-t * t / bw2).exp();
        *v = e;
        *d = -2.0 * t / bw2 * e;
    }
}

impl CvkanModel {
    fn with_params(spec: ModelSpec, params: Vec<f64>) -> Result<Self> {
        spec.validate()?;
        let layout = spec.layout();
        if params.len() != layout.total {
            return Err(CvkanError::Shape(format!(
                "architecture needs {} parameters, got {}",
                layout.total,
                params.len()
            )));
        }
        let running = (0..spec.depth())
            .map(|l| {
                if spec.has_norm(l) {
                    vec![RunningStats::initial(spec.norm); spec.widths[l + 1]]
                } else {
                    Vec::new()
                }
            })
            .collect();
        let axis = spec.grid.axis();
        Ok(Self {
            spec,
            layout,
            params,
            running,
            momentum: DEFAULT_MOMENTUM,
            eps: DEFAULT_EPS,
            axis,
        })
    }

    /// Every parameter zero except normalization layers, which start at identity.
    pub fn zeroed(spec: ModelSpec) -> Result<Self> {
        let total = spec.validate().map(|_| spec.param_count())?;
        let mut model = Self::with_params(spec, vec![0.0; total])?;
        model.reset_norm_params();
        Ok(model)
    }

    fn reset_norm_params(&mut self) {
        let identity = self.spec.norm.identity_params();
        for layer in &self.layout.layers {
            if let Some((start, stride)) = layer.norm {
                for q in 0..layer.n_out {
                    let at = start + q * stride;
                    self.params[at..at + stride].copy_from_slice(identity);
                }
            }
        }
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn layout(&self) -> &ParamLayout {
        &self.layout
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.params.len() {
            return Err(CvkanError::Shape(format!(
                "expected {} parameters, got {}",
                self.params.len(),
                params.len()
            )));
        }
        self.params.copy_from_slice(params);
        Ok(())
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn running_stats(&self) -> &[Vec<RunningStats>] {
        &self.running
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn n_inputs(&self) -> usize {
        self.spec.widths[0]
    }

    pub fn n_outputs(&self) -> usize {
        *self.spec.widths.last().expect("validated widths")
    }

    /// Edge `E_{l,q,p}` as a standalone function. FastKAN edges are not
    /// complex edges and yield an error.
    pub fn edge(&self, layer: usize, q: usize, p: usize) -> Result<EdgeFunction> {
        let ll = self.layer_layout(layer)?;
        let domain = match ll.kind {
            EdgeKind::Complex => OutputDomain::Complex,
            EdgeKind::ComplexToReal => OutputDomain::Real,
            EdgeKind::Real => {
                return Err(CvkanError::Config("FastKAN edges are real-valued".into()))
            }
        };
        Self::check_edge_index(ll, q, p)?;
        let at = ll.edge(q, p);
        EdgeFunction::from_flat(
            self.spec.grid,
            self.spec.csilu,
            domain,
            &self.params[at..at + ll.edge_stride],
        )
    }

    pub fn set_edge(&mut self, layer: usize, q: usize, p: usize, edge: &EdgeFunction) -> Result<()> {
        let ll = self.layer_layout(layer)?.clone();
        Self::check_edge_index(&ll, q, p)?;
        let flat = edge.to_flat();
        if flat.len() != ll.edge_stride || edge.csilu.variant() != self.spec.csilu {
            return Err(CvkanError::Shape("edge does not fit this layer".into()));
        }
        let at = ll.edge(q, p);
        self.params[at..at + ll.edge_stride].copy_from_slice(&flat);
        Ok(())
    }

    /// Real RBF weights and SiLU weight of a FastKAN edge.
    pub fn real_edge(&self, layer: usize, q: usize, p: usize) -> Result<(Vec<f64>, f64)> {
        let ll = self.layer_layout(layer)?;
        if ll.kind != EdgeKind::Real {
            return Err(CvkanError::Config("not a real-valued edge layer".into()));
        }
        Self::check_edge_index(ll, q, p)?;
        let at = ll.edge(q, p);
        let g = self.spec.grid.points_per_dim;
        Ok((self.params[at..at + g].to_vec(), self.params[at + g]))
    }

    pub fn edge_bank(&self, layer: usize) -> Result<EdgeBank> {
        let ll = self.layer_layout(layer)?;
        let mut edges = Vec::with_capacity(ll.n_in * ll.n_out);
        for q in 0..ll.n_out {
            for p in 0..ll.n_in {
                edges.push(self.edge(layer, q, p)?);
            }
        }
        EdgeBank::new(ll.n_in, ll.n_out, edges)
    }

    /// The normalization layer after edge layer `layer`, in eval mode.
    pub fn norm_layer(&self, layer: usize) -> Option<NormLayer> {
        let ll = self.layout.layers.get(layer)?;
        let (start, stride) = ll.norm?;
        Some(NormLayer {
            variant: self.spec.norm,
            width: ll.n_out,
            params: self.params[start..start + stride * ll.n_out].to_vec(),
            running: self.running[layer].clone(),
            momentum: self.momentum,
            eps: self.eps,
            mode: NormMode::Eval,
        })
    }

    fn layer_layout(&self, layer: usize) -> Result<&LayerLayout> {
        self.layout
            .layers
            .get(layer)
            .ok_or_else(|| CvkanError::Shape(format!("no layer {layer}")))
    }

    fn check_edge_index(ll: &LayerLayout, q: usize, p: usize) -> Result<()> {
        if q >= ll.n_out || p >= ll.n_in {
            return Err(CvkanError::Shape(format!(
                "edge ({q}, {p}) outside a {}x{} layer",
                ll.n_out, ll.n_in
            )));
        }
        Ok(())
    }

    fn check_input(&self, x: &ComplexBatch) -> Result<()> {
        if x.cols() != self.n_inputs() {
            return Err(CvkanError::Shape(format!(
                "model expects {} input features, got {}",
                self.n_inputs(),
                x.cols()
            )));
        }
        Ok(())
    }

    fn basis_width(&self, kind: EdgeKind) -> usize {
        let g = self.spec.grid.points_per_dim;
        match kind {
            EdgeKind::Real => 2 * g,
            _ => 4 * g,
        }
    }

    fn fill_basis(&self, kind: EdgeKind, x: ComplexScalar, basis: &mut [f64], act: &mut [f64; 4]) {
        let g = self.axis.len();
        let bw2 = self.spec.grid.bandwidth * self.spec.grid.bandwidth;
        match kind {
            EdgeKind::Real => {
                let (v, d) = basis.split_at_mut(g);
                fill_axis_basis(x.re, &self.axis, bw2, v, d);
                *act = [silu(x.re), silu_derivative(x.re), 0.0, 0.0];
            }
            _ => {
                let (re, im) = basis.split_at_mut(2 * g);
                let (a, da) = re.split_at_mut(g);
                let (b, db) = im.split_at_mut(g);
                fill_axis_basis(x.re, &self.axis, bw2, a, da);
                fill_axis_basis(x.im, &self.axis, bw2, b, db);
                *act = [
                    silu(x.re),
                    silu_derivative(x.re),
                    silu(x.im),
                    silu_derivative(x.im),
                ];
            }
        }
    }

    fn edge_value(&self, kind: EdgeKind, w: &[f64], basis: &[f64], act: &[f64; 4]) -> ComplexScalar {
        let g = self.axis.len();
        let (sr, si) = (act[0], act[2]);
        match kind {
            EdgeKind::Complex => {
                let (a, b) = (&basis[..g], &basis[2 * g..3 * g]);
                let (mut yr, mut yi) = (0.0, 0.0);
                for (u, au) in a.iter().enumerate() {
                    let row = &w[2 * u * g..2 * (u + 1) * g];
                    let (mut tr, mut ti) = (0.0, 0.0);
                    for (pair, bv) in row.chunks_exact(2).zip(b) {
                        tr += pair[0] * bv;
                        ti += pair[1] * bv;
                    }
                    yr += au * tr;
                    yi += au * ti;
                }
                let r = &w[2 * g * g..];
                match self.spec.csilu {
                    CsiluVariant::Complex => ComplexScalar::new(
                        yr + r[0] * sr - r[1] * si + r[2],
                        yi + r[0] * si + r[1] * sr + r[3],
                    ),
                    CsiluVariant::Real => {
                        ComplexScalar::new(yr + r[0] * sr + r[2], yi + r[1] * si + r[3])
                    }
                }
            }
            EdgeKind::ComplexToReal => {
                let (a, b) = (&basis[..g], &basis[2 * g..3 * g]);
                let mut y = 0.0;
                for (u, au) in a.iter().enumerate() {
                    let row = &w[u * g..(u + 1) * g];
                    let t: f64 = row.iter().zip(b).map(|(wv, bv)| wv * bv).sum();
                    y += au * t;
                }
                let r = &w[g * g..];
                let res = match self.spec.csilu {
                    CsiluVariant::Complex => r[0] * sr - r[1] * si + r[2],
                    CsiluVariant::Real => r[0] * sr + r[2],
                };
                ComplexScalar::new(y + res, 0.0)
            }
            EdgeKind::Real => {
                let y: f64 = w[..g].iter().zip(&basis[..g]).map(|(wi, phi)| wi * phi).sum();
                ComplexScalar::new(y + w[g] * sr, 0.0)
            }
        }
    }

    /// Accumulates parameter gradients of one edge evaluation and returns the
    /// gradient with respect to the edge input.
    #[allow(clippy::too_many_arguments)]
    fn edge_backward(
        &self,
        kind: EdgeKind,
        w: &[f64],
        basis: &[f64],
        act: &[f64; 4],
        grad: ComplexScalar,
        gw: &mut [f64],
    ) -> ComplexScalar {
        let g = self.axis.len();
        let (sr, dsr, si, dsi) = (act[0], act[1], act[2], act[3]);
        let (gr, gi) = (grad.re, grad.im);
        match kind {
            EdgeKind::Complex => {
                let (a, da) = (&basis[..g], &basis[g..2 * g]);
                let (b, db) = (&basis[2 * g..3 * g], &basis[3 * g..]);
                let (mut ga, mut gb) = (0.0, 0.0);
                for u in 0..g {
                    let lo = 2 * u * g;
                    let row = &w[lo..lo + 2 * g];
                    let grow = &mut gw[lo..lo + 2 * g];
                    let (mut cb, mut cdb) = (0.0, 0.0);
                    let (ar, ai) = (gr * a[u], gi * a[u]);
                    for v in 0..g {
                        let c = gr * row[2 * v] + gi * row[2 * v + 1];
                        cb += c * b[v];
                        cdb += c * db[v];
                        grow[2 * v] += ar * b[v];
                        grow[2 * v + 1] += ai * b[v];
                    }
                    ga += da[u] * cb;
                    gb += a[u] * cdb;
                }
                let r = &w[2 * g * g..];
                let gr_tail = &mut gw[2 * g * g..];
                let (gsr, gsi) = match self.spec.csilu {
                    CsiluVariant::Complex => {
                        gr_tail[0] += gr * sr + gi * si;
                        gr_tail[1] += -gr * si + gi * sr;
                        gr_tail[2] += gr;
                        gr_tail[3] += gi;
                        (gr * r[0] + gi * r[1], -gr * r[1] + gi * r[0])
                    }
                    CsiluVariant::Real => {
                        gr_tail[0] += gr * sr;
                        gr_tail[1] += gi * si;
                        gr_tail[2] += gr;
                        gr_tail[3] += gi;
                        (gr * r[0], gi * r[1])
                    }
                };
                ComplexScalar::new(ga + gsr * dsr, gb + gsi * dsi)
            }
            EdgeKind::ComplexToReal => {
                let (a, da) = (&basis[..g], &basis[g..2 * g]);
                let (b, db) = (&basis[2 * g..3 * g], &basis[3 * g..]);
                let (mut ga, mut gb) = (0.0, 0.0);
                for u in 0..g {
                    let row = &w[u * g..(u + 1) * g];
                    let grow = &mut gw[u * g..(u + 1) * g];
                    let (mut cb, mut cdb) = (0.0, 0.0);
                    let au = gr * a[u];
                    for v in 0..g {
                        cb += row[v] * b[v];
                        cdb += row[v] * db[v];
                        grow[v] += au * b[v];
                    }
                    ga += gr * da[u] * cb;
                    gb += gr * a[u] * cdb;
                }
                let r = &w[g * g..];
                let tail = &mut gw[g * g..];
                let (gsr, gsi) = match self.spec.csilu {
                    CsiluVariant::Complex => {
                        tail[0] += gr * sr;
                        tail[1] -= gr * si;
                        tail[2] += gr;
                        (gr * r[0], -gr * r[1])
                    }
                    CsiluVariant::Real => {
                        tail[0] += gr * sr;
                        tail[2] += gr;
                        (gr * r[0], 0.0)
                    }
                };
                ComplexScalar::new(ga + gsr * dsr, gb + gsi * dsi)
            }
            EdgeKind::Real => {
                let (phi, dphi) = (&basis[..g], &basis[g..2 * g]);
                let mut gx = 0.0;
                for i in 0..g {
                    gw[i] += gr * phi[i];
                    gx += gr * w[i] * dphi[i];
                }
                gw[g] += gr * sr;
                ComplexScalar::new(gx + gr * w[g] * dsr, 0.0)
            }
        }
    }

    /// Edge sums of one layer before normalization, plus the saved basis.
    fn layer_sums(
        &self,
        ll: &LayerLayout,
        input: &[ComplexScalar],
        rows: usize,
        mut edge_sink: Option<&mut Vec<ComplexScalar>>,
    ) -> (Vec<ComplexScalar>, Vec<f64>, Vec<[f64; 4]>) {
        let bwidth = self.basis_width(ll.kind);
        let mut basis = vec![0.0; rows * ll.n_in * bwidth];
        let mut act = vec![[0.0; 4]; rows * ll.n_in];
        let mut sums = vec![ComplexScalar::new(0.0, 0.0); rows * ll.n_out];
        if let Some(sink) = edge_sink.as_deref_mut() {
            sink.clear();
            sink.resize(rows * ll.n_in * ll.n_out, ComplexScalar::new(0.0, 0.0));
        }
        for s in 0..rows {
            for p in 0..ll.n_in {
                let k = s * ll.n_in + p;
                self.fill_basis(
                    ll.kind,
                    input[k],
                    &mut basis[k * bwidth..(k + 1) * bwidth],
                    &mut act[k],
                );
            }
            for q in 0..ll.n_out {
                let mut total = ComplexScalar::new(0.0, 0.0);
                for p in 0..ll.n_in {
                    let k = s * ll.n_in + p;
                    let at = ll.edge(q, p);
                    let y = self.edge_value(
                        ll.kind,
                        &self.params[at..at + ll.edge_stride],
                        &basis[k * bwidth..(k + 1) * bwidth],
                        &act[k],
                    );
                    if let Some(sink) = edge_sink.as_deref_mut() {
                        sink[(q * ll.n_in + p) * rows + s] = y;
                    }
                    total += y;
                }
                sums[s * ll.n_out + q] = total;
            }
        }
        (sums, basis, act)
    }

    /// Train-mode forward pass: normalization layers use batch statistics.
    pub fn forward_train(&self, x: &ComplexBatch) -> Result<(ComplexBatch, ForwardCache)> {
        self.check_input(x)?;
        let rows = x.rows();
        let mut input = x.data().to_vec();
        let mut caches = Vec::with_capacity(self.spec.depth());
        for ll in &self.layout.layers {
            let (mut sums, basis, act) = self.layer_sums(ll, &input, rows, None);
            let mut norm = Vec::new();
            if let Some((start, stride)) = ll.norm {
                for q in 0..ll.n_out {
                    let col: Vec<ComplexScalar> = (0..rows).map(|s| sums[s * ll.n_out + q]).collect();
                    let p = &self.params[start + q * stride..start + (q + 1) * stride];
                    let (y, cache) = forward_train_feature(self.spec.norm, p, &col, self.eps)?;
                    for (s, v) in y.into_iter().enumerate() {
                        sums[s * ll.n_out + q] = v;
                    }
                    norm.push(cache);
                }
            }
            caches.push(LayerCache { basis, act, norm });
            input = sums;
        }
        let out = ComplexBatch::new(rows, self.n_outputs(), input)
            .map_err(|e| CvkanError::NonFinite(format!("model output: {e}")))?;
        Ok((
            out,
            ForwardCache {
                rows,
                layers: caches,
            },
        ))
    }

    /// Gradient of a scalar loss with respect to every parameter, given
    /// `grad_out[s * n_out + k] = ∂L/∂Re y + i·∂L/∂Im y`.
    pub fn backward(&self, cache: &ForwardCache, grad_out: &[ComplexScalar]) -> Vec<f64> {
        let rows = cache.rows;
        let mut grads = vec![0.0; self.params.len()];
        let mut upstream = grad_out.to_vec();
        for (l, ll) in self.layout.layers.iter().enumerate().rev() {
            let lc = &cache.layers[l];
            if let Some((start, stride)) = ll.norm {
                for q in 0..ll.n_out {
                    let col: Vec<ComplexScalar> =
                        (0..rows).map(|s| upstream[s * ll.n_out + q]).collect();
                    let range = start + q * stride..start + (q + 1) * stride;
                    let g = backward_feature(
                        self.spec.norm,
                        &self.params[range.clone()],
                        &lc.norm[q],
                        &col,
                        &mut grads[range],
                    );
                    for (s, v) in g.into_iter().enumerate() {
                        upstream[s * ll.n_out + q] = v;
                    }
                }
            }
            let bwidth = self.basis_width(ll.kind);
            let mut grad_in = if l > 0 {
                vec![ComplexScalar::new(0.0, 0.0); rows * ll.n_in]
            } else {
                Vec::new()
            };
            for s in 0..rows {
                for q in 0..ll.n_out {
                    let g = upstream[s * ll.n_out + q];
                    if g.re == 0.0 && g.im == 0.0 {
                        continue;
                    }
                    for p in 0..ll.n_in {
                        let k = s * ll.n_in + p;
                        let at = ll.edge(q, p);
                        let gx = self.edge_backward(
                            ll.kind,
                            &self.params[at..at + ll.edge_stride],
                            &lc.basis[k * bwidth..(k + 1) * bwidth],
                            &lc.act[k],
                            g,
                            &mut grads[at..at + ll.edge_stride],
                        );
                        if l > 0 {
                            grad_in[k] += gx;
                        }
                    }
                }
            }
            upstream = grad_in;
        }
        grads
    }

    /// Folds the batch statistics of a train-mode pass into the running statistics.
    pub fn update_running_stats(&mut self, cache: &ForwardCache) {
        for (running, lc) in self.running.iter_mut().zip(&cache.layers) {
            for (r, fc) in running.iter_mut().zip(&lc.norm) {
                r.update(&fc.stats, self.momentum);
            }
        }
    }

    fn eval_pass(&self, x: &ComplexBatch, mut trace: Option<&mut ModelTrace>) -> Result<ComplexBatch> {
        self.check_input(x)?;
        let rows = x.rows();
        let mut input = x.data().to_vec();
        if let Some(t) = trace.as_deref_mut() {
            t.vertex_values.push(transpose(&input, rows, self.n_inputs()));
        }
        for (l, ll) in self.layout.layers.iter().enumerate() {
            let mut sink = trace.as_ref().map(|_| Vec::new());
            let (mut sums, _, _) = self.layer_sums(ll, &input, rows, sink.as_mut());
            if let Some((start, stride)) = ll.norm {
                for q in 0..ll.n_out {
                    let col: Vec<ComplexScalar> = (0..rows).map(|s| sums[s * ll.n_out + q]).collect();
                    let p = &self.params[start + q * stride..start + (q + 1) * stride];
                    let y = forward_eval_feature(self.spec.norm, p, &self.running[l][q], &col, self.eps);
                    for (s, v) in y.into_iter().enumerate() {
                        sums[s * ll.n_out + q] = v;
                    }
                }
            }
            if let Some(t) = trace.as_deref_mut() {
                t.edge_outputs.push(sink.unwrap_or_default());
                t.vertex_values.push(transpose(&sums, rows, ll.n_out));
            }
            input = sums;
        }
        ComplexBatch::new(rows, self.n_outputs(), input)
            .map_err(|e| CvkanError::NonFinite(format!("model output: {e}")))
    }

    /// Eval-mode forward pass using running statistics.
    pub fn predict(&self, x: &ComplexBatch) -> Result<ComplexBatch> {
        self.eval_pass(x, None)
    }

    /// Eval-mode pass recording every edge output and vertex value.
    pub fn trace(&self, x: &ComplexBatch) -> Result<ModelTrace> {
        let mut t = ModelTrace {
            rows: x.rows(),
            edge_outputs: Vec::new(),
            vertex_values: Vec::new(),
        };
        self.eval_pass(x, Some(&mut t))?;
        Ok(t)
    }

    pub fn to_document(&self) -> ModelDocument {
        ModelDocument {
            version: MODEL_FORMAT_VERSION,
            spec: self.spec.clone(),
            params: self.params.clone(),
            running: self.running.clone(),
            momentum: self.momentum,
            eps: self.eps,
        }
    }

    pub fn from_document(doc: ModelDocument) -> Result<Self> {
        if doc.version != MODEL_FORMAT_VERSION {
            return Err(CvkanError::Version {
                expected: MODEL_FORMAT_VERSION,
                found: doc.version,
            });
        }
        let mut model = Self::with_params(doc.spec, doc.params)?;
        let shapes_match = doc.running.len() == model.running.len()
            && doc
                .running
                .iter()
                .zip(&model.running)
                .all(|(a, b)| a.len() == b.len());
        if !shapes_match {
            return Err(CvkanError::Shape("running statistics do not fit the architecture".into()));
        }
        model.running = doc.running;
        model.momentum = doc.momentum;
        model.eps = doc.eps;
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_string_pretty(&self.to_document())?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(&fs::read_to_string(path)?)?;
        Self::from_document(doc)
    }
}

fn transpose(values: &[ComplexScalar], rows: usize, cols: usize) -> Vec<ComplexScalar> {
    let mut out = Vec::with_capacity(values.len());
    for c in 0..cols {
        out.extend((0..rows).map(|r| values[r * cols + c]));
    }
    out
}

/// Serialized model file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub version: u32,
    pub spec: ModelSpec,
    pub params: Vec<f64>,
    pub running: Vec<Vec<RunningStats>>,
    pub momentum: f64,
    pub eps: f64,
}

/// Fresh model: RBF weights drawn from `N(0, (1/G)²)` per real channel,
/// residual weights at one with zero bias, normalization at identity.
pub fn init_model(spec: &ModelSpec, seed: u64) -> Result<CvkanModel> {
    let mut model = CvkanModel::zeroed(spec.clone())?;
    let g = spec.grid.points_per_dim;
    let normal = Normal::new(0.0, 1.0 / g as f64).expect("positive std");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let identity = CsiluParams::identity(spec.csilu).to_reals();
    let layers = model.layout.layers.clone();
    for ll in &layers {
        let n_rbf = match ll.kind {
            EdgeKind::Complex => 2 * g * g,
            EdgeKind::ComplexToReal => g * g,
            EdgeKind::Real => g,
        };
        for q in 0..ll.n_out {
            for p in 0..ll.n_in {
                let at = ll.edge(q, p);
                let block = &mut model.params[at..at + ll.edge_stride];
                for w in &mut block[..n_rbf] {
                    *w = normal.sample(&mut rng);
                }
                match ll.kind {
                    EdgeKind::Complex => block[n_rbf..].copy_from_slice(&identity),
                    EdgeKind::ComplexToReal => block[n_rbf..].copy_from_slice(&identity[..3]),
                    EdgeKind::Real => block[n_rbf] = 1.0,
                }
            }
        }
    }
    Ok(model)
}
