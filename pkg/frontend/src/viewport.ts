import * as THREE from "three";
import { OrbitControls } from "three/examples/jsm/controls/OrbitControls.js";
import { TransformControls } from "three/examples/jsm/controls/TransformControls.js";
import type { EditorSession } from "./editor";
import type { ParsedObj } from "./obj";

const JOINT_RADIUS = 0.018;
const JOINT_COLOR = 0x4aa3ff;
const JOINT_SELECTED = 0xffc24a;
const BONE_COLOR = 0xdddddd;

/** Three.js view of the working skeleton plus the mesh preview.
 * The gizmo is an axis-handle translation control; drags collapse into one
 * undo step via the session's beginDrag/endDrag. */
export class Viewport {
  readonly scene = new THREE.Scene();
  readonly camera: THREE.PerspectiveCamera;
  readonly renderer: THREE.WebGLRenderer;
  private orbit: OrbitControls;
  private gizmo: TransformControls;
  private joints = new Map<string, THREE.Mesh>();
  private jointGroup = new THREE.Group();
  private boneLines: THREE.LineSegments;
  private meshGroup = new THREE.Group();
  private raycaster = new THREE.Raycaster();
  private selfUpdate = false;

  constructor(private session: EditorSession, container: HTMLElement) {
    this.camera = new THREE.PerspectiveCamera(50, 1, 0.01, 50);
    this.camera.up.set(0, 0, 1); // scene is z-up
    this.camera.position.set(2.2, 1.6, 1.2);

    this.renderer = new THREE.WebGLRenderer({ antialias: true });
    this.renderer.setClearColor(0x101216);
    container.appendChild(this.renderer.domElement);

    this.scene.add(new THREE.AmbientLight(0xffffff, 0.7));
    const sun = new THREE.DirectionalLight(0xffffff, 1.2);
    sun.position.set(3, 2, 4);
    this.scene.add(sun);
    const grid = new THREE.GridHelper(4, 16, 0x333944, 0x23272e);
    grid.rotation.x = Math.PI / 2; // z-up floor
    grid.position.z = -1.0;
    this.scene.add(grid);

    this.boneLines = new THREE.LineSegments(
      new THREE.BufferGeometry(),
      new THREE.LineBasicMaterial({ color: BONE_COLOR }),
    );
    this.scene.add(this.boneLines);
    this.scene.add(this.jointGroup);
    this.scene.add(this.meshGroup);

    this.orbit = new OrbitControls(this.camera, this.renderer.domElement);
    this.orbit.target.set(0, 0, 0);

    this.gizmo = new TransformControls(this.camera, this.renderer.domElement);
    this.gizmo.setMode("translate");
    this.gizmo.setSize(0.7);
    this.scene.add(this.gizmo.getHelper());
    this.gizmo.addEventListener("dragging-changed", (event) => {
      this.orbit.enabled = !event.value;
      if (event.value) {
        this.session.beginDrag();
      } else {
        this.session.endDrag();
      }
    });
    this.gizmo.addEventListener("objectChange", () => {
      const name = this.session.selection;
      const target = name ? this.joints.get(name) : undefined;
      if (!name || !target) return;
      this.selfUpdate = true;
      this.session.setKeypointPosition(name, [
        target.position.x,
        target.position.y,
        target.position.z,
      ]);
      this.selfUpdate = false;
      this.syncBones();
    });

    this.renderer.domElement.addEventListener("pointerdown", (event) => {
      if (this.gizmo.dragging) return;
      const rect = this.renderer.domElement.getBoundingClientRect();
      const ndc = new THREE.Vector2(
        ((event.clientX - rect.left) / rect.width) * 2 - 1,
        -((event.clientY - rect.top) / rect.height) * 2 + 1,
      );
      this.raycaster.setFromCamera(ndc, this.camera);
      const hits = this.raycaster.intersectObjects([...this.joints.values()]);
      if (hits.length > 0) this.session.select(hits[0].object.name);
    });

    session.onChange(() => {
      if (!this.selfUpdate) this.sync();
    });

    const resize = () => {
      const w = container.clientWidth || 640;
      const h = container.clientHeight || 480;
      this.renderer.setSize(w, h);
      this.camera.aspect = w / h;
      this.camera.updateProjectionMatrix();
    };
    new ResizeObserver(resize).observe(container);
    resize();

    this.renderer.setAnimationLoop(() => {
      this.orbit.update();
      this.renderer.render(this.scene, this.camera);
    });
  }

  /** Rebuild or refresh joints and bones from the session state. */
  sync(): void {
    const doc = this.session.working;
    if (!doc) return;
    const names = doc.keypoints.map((k) => k.name);
    const sameTopology =
      names.length === this.joints.size && names.every((n) => this.joints.has(n));

    if (!sameTopology) {
      this.gizmo.detach();
      this.jointGroup.clear();
      this.joints.clear();
      for (const kp of doc.keypoints) {
        const sphere = new THREE.Mesh(
          new THREE.SphereGeometry(JOINT_RADIUS, 16, 12),
          new THREE.MeshStandardMaterial({ color: JOINT_COLOR }),
        );
        sphere.name = kp.name;
        this.jointGroup.add(sphere);
        this.joints.set(kp.name, sphere);
      }
    }
    for (const kp of doc.keypoints) {
      this.joints.get(kp.name)!.position.set(kp.xyz[0], kp.xyz[1], kp.xyz[2]);
    }
    for (const [name, sphere] of this.joints) {
      const material = sphere.material as THREE.MeshStandardMaterial;
      material.color.setHex(name === this.session.selection ? JOINT_SELECTED : JOINT_COLOR);
    }
    const selected = this.session.selection
      ? this.joints.get(this.session.selection)
      : undefined;
    if (selected) {
      this.gizmo.attach(selected);
    } else {
      this.gizmo.detach();
    }
    this.syncBones();
  }

  private syncBones(): void {
    const doc = this.session.working;
    if (!doc) return;
    const positions = new Map(doc.keypoints.map((k) => [k.name, k.xyz]));
    const flat: number[] = [];
    for (const [a, b] of doc.bones) {
      const pa = positions.get(a);
      const pb = positions.get(b);
      if (pa && pb) flat.push(...pa, ...pb);
    }
    this.boneLines.geometry.dispose();
    const geometry = new THREE.BufferGeometry();
    geometry.setAttribute("position", new THREE.Float32BufferAttribute(flat, 3));
    this.boneLines.geometry = geometry;
  }

  showMesh(parsed: ParsedObj): void {
    this.clearMesh();
    const geometry = new THREE.BufferGeometry();
    geometry.setAttribute("position", new THREE.Float32BufferAttribute(parsed.positions, 3));
    geometry.setIndex(parsed.triangles);
    geometry.computeVertexNormals();
    const mesh = new THREE.Mesh(
      geometry,
      new THREE.MeshStandardMaterial({
        color: 0x8fd18f,
        transparent: true,
        opacity: 0.55,
        side: THREE.DoubleSide,
      }),
    );
    this.meshGroup.add(mesh);
  }

  clearMesh(): void {
    for (const child of [...this.meshGroup.children]) {
      this.meshGroup.remove(child);
      const mesh = child as THREE.Mesh;
      mesh.geometry?.dispose();
    }
  }
}
