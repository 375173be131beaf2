use super::{Family, Letter, ScalarCoeff, TracePolynomial, Word};

/// One expanded alternative of a word: coefficient, extra trace factors and
/// the word itself.
type Alt = (ScalarCoeff, Vec<Word>, Word);

fn expand_word(word: &[Letter], slot: u32, q: &TracePolynomial, q_star: &TracePolynomial) -> Vec<Alt> {
    let mut alts: Vec<Alt> = vec![(ScalarCoeff::one(), Vec::new(), Vec::new())];
    for &l in word {
        if !l.is_slot(slot) {
            for a in &mut alts {
                a.2.push(l);
            }
            continue;
        }
        let src = if l.starred { q_star } else { q };
        let mut next = Vec::with_capacity(alts.len() * src.len());
        for (c, tr, w) in &alts {
            for (key, qc) in src.raw_terms() {
                let mut tr2 = tr.clone();
                tr2.extend(key.traces.iter().map(|t| t.word().to_vec()));
                let mut w2 = w.clone();
                w2.extend_from_slice(&key.outer);
                next.push((c * qc, tr2, w2));
            }
        }
        alts = next;
    }
    alts
}

impl TracePolynomial {
    /// Substitutes the polynomial `q` for every letter of slot `slot`
    /// (`q*` for starred occurrences), i.e. composes multilinear maps.
    pub fn substitute_slot(&self, slot: u32, q: &TracePolynomial) -> TracePolynomial {
        let q_star = q.star();
        let mut out = TracePolynomial::zero().with_num_vars(self.num_vars().max(q.num_vars()));
        for (key, c) in self.raw_terms() {
            // Cartesian product over the containers of the term.
            let mut acc: Vec<(ScalarCoeff, Vec<Word>)> = vec![(c.clone(), Vec::new())];
            for t in &key.traces {
                let alts = expand_word(t.word(), slot, q, &q_star);
                let mut next = Vec::with_capacity(acc.len() * alts.len());
                for (c0, tr0) in &acc {
                    for (c1, tr1, w1) in &alts {
                        let mut tr = tr0.clone();
                        tr.extend(tr1.iter().cloned());
                        tr.push(w1.clone());
                        next.push((c0 * c1, tr));
                    }
                }
                acc = next;
            }
            let outer_alts = expand_word(&key.outer, slot, q, &q_star);
            for (c0, tr0) in &acc {
                for (c1, tr1, w1) in &outer_alts {
                    let mut tr = tr0.clone();
                    tr.extend(tr1.iter().cloned());
                    out.push_term(c0 * c1, tr, w1.clone());
                }
            }
        }
        out
    }

    /// Composes a 2-linear `self` with 1-linear `h` (slot 1) and `k` (slot 1):
    /// `(y1, y2) ↦ self[h[y1], k[y2]]`.
    pub fn compose_bilinear(&self, h: &TracePolynomial, k: &TracePolynomial) -> TracePolynomial {
        // Park slot 2 out of the way so h's y1 cannot be confused with it.
        let parked = self.relabel_slot(2, u32::MAX);
        let with_h = parked.substitute_slot(1, h);
        with_h.substitute_slot(u32::MAX, &k.relabel_slot(1, 2))
    }

    pub fn has_letter(&self, pred: impl Fn(&Letter) -> bool) -> bool {
        self.raw_terms().any(|(k, _)| k.letters().any(&pred))
    }

    pub fn is_x_only(&self) -> bool {
        !self.has_letter(|l| l.family == Family::Y)
    }
}
